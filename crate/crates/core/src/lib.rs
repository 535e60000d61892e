pub mod correct;
pub mod detect;
pub mod dom;
pub mod eval;
pub mod fetch;
pub mod llm;
pub mod report;
pub mod semantic;
pub mod taxonomy;
pub mod violation;
