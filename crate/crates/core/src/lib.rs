pub mod coloring;
pub mod corpus;
pub mod dlocal;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod mcm;
pub mod mis;
pub mod mwm;
pub mod par;
pub mod verify;
