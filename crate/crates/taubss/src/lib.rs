pub mod abgroup;
pub mod chart;
pub mod couple;
pub mod doc;
pub mod equivariant;
pub mod cover;
pub mod fcc;
pub mod grading;
pub mod groups;
pub mod jsonnum;
pub mod matrix;
pub mod random_towers;
pub mod render;
