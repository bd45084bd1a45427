pub mod casestudy;
pub mod foe;
pub mod formula;
pub mod model;
pub mod semantics;
pub mod specs;
pub mod trace;
