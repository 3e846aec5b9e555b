pub mod estimate;
pub mod fit;
pub mod generate;
pub mod report;
pub mod validate;
