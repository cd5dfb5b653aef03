use serde::Serialize;
use thiserror::Error;

/// Every way a run can fail; each kind has its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    MissingInput(String),
    #[error("{0}")]
    InputData(String),
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Output(String),
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    exit: i32,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "invalid_config",
            CliError::MissingInput(_) => "missing_input",
            CliError::InputData(_) => "input_data",
            CliError::Model(_) => "model_or_solve",
            CliError::Output(_) => "output",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::MissingInput(_) => 4,
            CliError::InputData(_) => 5,
            CliError::Model(_) => 6,
            CliError::Output(_) => 7,
        }
    }

    /// One line of JSON for stderr.
    pub fn json_line(&self) -> String {
        let message = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        serde_json::to_string(&ErrorLine {
            error: self.kind(),
            exit: self.exit_code(),
            message,
        })
        .expect("error line serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_and_nonzero() {
        let all = [
            CliError::Usage(String::new()),
            CliError::Config(String::new()),
            CliError::MissingInput(String::new()),
            CliError::InputData(String::new()),
            CliError::Model(String::new()),
            CliError::Output(String::new()),
        ];
        let mut codes: Vec<i32> = all.iter().map(CliError::exit_code).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), all.len());
        assert!(codes.iter().all(|&c| c > 1));
    }

    #[test]
    fn error_line_is_single_line_json() {
        let line = CliError::InputData("bad row\nat line 3".into()).json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "input_data");
        assert_eq!(v["exit"], 5);
        assert_eq!(v["message"], "bad row at line 3");
    }
}
