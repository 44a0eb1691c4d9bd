use std::io;
use std::net::{IpAddr, Ipv4Addr};
use std::path::PathBuf;

use qaforge_core::reference::StoreIoError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub host: IpAddr,
    pub port: u16,
    pub qa_file: PathBuf,
    pub records_file: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    /// fsync the QA file after every append.
    pub fsync: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            qa_file: PathBuf::from("qa_data.jsonl"),
            records_file: None,
            static_dir: None,
            fsync: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot bind {0}: {1}")]
    Bind(String, #[source] io::Error),
    #[error("records store: {0}")]
    Records(#[from] StoreIoError),
    #[error(transparent)]
    Io(io::Error),
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ServerError> {
        if self.port == 0 {
            return Err(ServerError::Config("port must be between 1 and 65535".into()));
        }
        let parent = self.qa_file.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = parent {
            if !dir.is_dir() {
                return Err(ServerError::Config(format!("directory {} does not exist", dir.display())));
            }
        }
        if let Some(dir) = &self.static_dir {
            if !dir.is_dir() {
                return Err(ServerError::Config(format!("static directory {} does not exist", dir.display())));
            }
        }
        Ok(())
    }
}
