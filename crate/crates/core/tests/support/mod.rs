pub mod twirl_oracle;
