pub mod sparql_oracle;
pub mod synthetic;
