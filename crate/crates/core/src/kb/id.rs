use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of an argument. Letters, digits, `_` and `-` only; case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArgumentId(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid argument id {0:?}: expected a non-empty token of letters, digits, '_' or '-'")]
pub struct InvalidId(pub String);

impl ArgumentId {
    pub fn new(value: impl Into<String>) -> Result<Self, InvalidId> {
        let value = value.into();
        if is_valid_token(&value) {
            Ok(Self(value))
        } else {
            Err(InvalidId(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_valid_token(value: &str) -> bool {
    !value.is_empty()
        && value
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl TryFrom<String> for ArgumentId {
    type Error = InvalidId;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ArgumentId> for String {
    fn from(id: ArgumentId) -> Self {
        id.0
    }
}

impl Borrow<str> for ArgumentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for ArgumentId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for ArgumentId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ArgumentId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_tokens() {
        for ok in ["woman", "P1", "no_protection", "x-1", "A_b-9"] {
            assert!(ArgumentId::new(ok).is_ok(), "{ok}");
        }
    }

    #[test]
    fn rejects_bad_tokens() {
        for bad in ["", "two words", "é", "a.b", "\"q\""] {
            assert!(ArgumentId::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn serde_validates() {
        let id: ArgumentId = serde_json::from_str("\"Nigeria\"").unwrap();
        assert_eq!(id, "Nigeria");
        assert!(serde_json::from_str::<ArgumentId>("\"not ok\"").is_err());
    }
}
