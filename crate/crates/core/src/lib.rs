pub mod group;
pub mod harness;
pub mod pattern;
pub mod tree;
pub mod window;
