use std::path::Path;

use cag_core::gateway::{HttpGateway, MockGateway, MockScript};
use cag_core::{Gateway, Role};

use crate::config::{invalid, FileConfig};

/// The gateway a command talks to: a scripted mock or real endpoints.
pub enum Backend {
    Mock(MockGateway),
    Http(HttpGateway),
}

impl Backend {
    pub fn build(mock: Option<&Path>, file: &FileConfig) -> anyhow::Result<Self> {
        if let Some(path) = mock {
            let script = MockScript::load(path)
                .map_err(|e| invalid(format!("cannot load mock script {}: {e}", path.display())))?;
            return Ok(Backend::Mock(MockGateway::new(script)));
        }
        let gw = HttpGateway::new(file.endpoints()?, file.retry_policy())
            .map_err(|e| invalid(format!("cannot build gateway: {e}")))?;
        Ok(Backend::Http(gw))
    }

    pub fn gateway(&self) -> &dyn Gateway {
        match self {
            Backend::Mock(m) => m,
            Backend::Http(h) => h,
        }
    }

    pub fn has_role(&self, role: Role) -> bool {
        match self {
            Backend::Mock(m) => m.script().rules.iter().any(|r| r.role == role),
            Backend::Http(h) => h.has_role(role),
        }
    }

    pub fn require(&self, roles: &[Role]) -> anyhow::Result<()> {
        match roles.iter().find(|r| !self.has_role(**r)) {
            Some(role) => Err(invalid(format!(
                "no endpoint for role {role}; set CAG_GATEWAY_{role}_URL and CAG_GATEWAY_{role}_MODEL or pass --mock"
            ))),
            None => Ok(()),
        }
    }
}
