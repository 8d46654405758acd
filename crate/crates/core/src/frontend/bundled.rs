//! Network descriptions shipped with the crate.

use std::path::Path;

use super::FrontendError;

const BUNDLED: &[(&str, &str)] = &[
    ("mlp4.net", include_str!("../../networks/mlp4.net")),
    ("cnv6.net", include_str!("../../networks/cnv6.net")),
    ("cnv6.cfg", include_str!("../../networks/cnv6.cfg")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Text of a bundled description, by file name with or without extension.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name || n.strip_suffix(".net") == Some(name))
        .map(|(_, text)| *text)
}

pub struct ResolvedNetwork {
    pub name: String,
    pub text: String,
}

/// Reads `path` from disk, or a bundled network of that name when no such
/// file exists.
pub fn resolve_network_path(path: &str) -> Result<ResolvedNetwork, FrontendError> {
    let p = Path::new(path);
    if p.exists() {
        let text = std::fs::read_to_string(p).map_err(|e| FrontendError::Io(format!("{path}: {e}")))?;
        return Ok(ResolvedNetwork { name: path.to_string(), text });
    }
    let base = p.file_name().and_then(|n| n.to_str()).unwrap_or(path);
    match bundled(base) {
        Some(text) => Ok(ResolvedNetwork { name: base.to_string(), text: text.to_string() }),
        None => Err(FrontendError::UnknownNetwork(path.to_string())),
    }
}
