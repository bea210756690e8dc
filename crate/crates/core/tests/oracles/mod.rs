#![allow(dead_code)]

pub mod gr1;
pub mod lasso;
pub mod perturb;
