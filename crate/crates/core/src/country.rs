//! ISO 3166-1 alpha-2 country codes and the address-name alias table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An uppercase ISO 3166-1 alpha-2 code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

/// Address-line spellings that do not already look like an alpha-2 code.
///
/// Keys are compared case-insensitively after whitespace collapsing. The four
/// constituent UK nations fold into `GB`, so the United Kingdom counts as one
/// country.
const ALIASES: &[(&str, &str)] = &[
    ("USA", "US"),
    ("UNITED STATES", "US"),
    ("UNITED STATES OF AMERICA", "US"),
    ("PEOPLES R CHINA", "CN"),
    ("PEOPLES REPUBLIC OF CHINA", "CN"),
    ("CHINA", "CN"),
    ("JAPAN", "JP"),
    ("UK", "GB"),
    ("UNITED KINGDOM", "GB"),
    ("ENGLAND", "GB"),
    ("SCOTLAND", "GB"),
    ("WALES", "GB"),
    ("NORTH IRELAND", "GB"),
    ("NORTHERN IRELAND", "GB"),
    ("GERMANY", "DE"),
    ("FED REP GER", "DE"),
    ("FRANCE", "FR"),
    ("CANADA", "CA"),
    ("ITALY", "IT"),
    ("INDIA", "IN"),
    ("SOUTH KOREA", "KR"),
    ("KOREA", "KR"),
    ("REPUBLIC OF KOREA", "KR"),
    ("SPAIN", "ES"),
    ("AUSTRALIA", "AU"),
    ("BRAZIL", "BR"),
    ("RUSSIA", "RU"),
    ("RUSSIAN FEDERATION", "RU"),
    ("TAIWAN", "TW"),
    ("NETHERLANDS", "NL"),
    ("THE NETHERLANDS", "NL"),
    ("TURKEY", "TR"),
    ("TURKIYE", "TR"),
    ("POLAND", "PL"),
    ("SWEDEN", "SE"),
    ("SWITZERLAND", "CH"),
    ("IRAN", "IR"),
];

impl CountryCode {
    /// Builds a code from two ASCII letters, uppercasing them.
    pub fn new(code: &str) -> Option<Self> {
        let bytes = code.as_bytes();
        if bytes.len() == 2 && bytes.iter().all(u8::is_ascii_alphabetic) {
            Some(Self([bytes[0].to_ascii_uppercase(), bytes[1].to_ascii_uppercase()]))
        } else {
            None
        }
    }

    /// Normalizes an address-line country string.
    ///
    /// The alias table is consulted first (so `"UK"` becomes `GB`), then any
    /// remaining two-letter token is taken as an alpha-2 code.
    pub fn normalize(raw: &str) -> Option<Self> {
        let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
        if collapsed.is_empty() {
            return None;
        }
        let upper = collapsed.to_ascii_uppercase();
        if let Some((_, code)) = ALIASES.iter().find(|(name, _)| *name == upper) {
            return Self::new(code);
        }
        Self::new(&upper)
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII letters are ever stored.
        std::str::from_utf8(&self.0).expect("country codes are ASCII")
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("not a country code or known country name: {0:?}")]
pub struct UnknownCountry(pub String);

impl FromStr for CountryCode {
    type Err = UnknownCountry;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::normalize(s).ok_or_else(|| UnknownCountry(s.to_owned()))
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    #[test]
    fn case_folds_alpha2() {
        assert_eq!(CountryCode::normalize("us"), Some(cc("US")));
        assert_eq!(CountryCode::normalize(" De "), Some(cc("DE")));
    }

    #[test]
    fn uk_nations_fold_to_gb() {
        for name in ["England", "SCOTLAND", "wales", "North Ireland", "UK"] {
            assert_eq!(CountryCode::normalize(name), Some(cc("GB")), "{name}");
        }
    }

    #[test]
    fn wos_style_names() {
        assert_eq!(CountryCode::normalize("Peoples R China"), Some(cc("CN")));
        assert_eq!(CountryCode::normalize("peoples  r   china"), Some(cc("CN")));
        assert_eq!(CountryCode::normalize("Russian Federation"), Some(cc("RU")));
    }

    #[test]
    fn rejects_unknown() {
        assert_eq!(CountryCode::normalize(""), None);
        assert_eq!(CountryCode::normalize("Atlantis"), None);
        assert_eq!(CountryCode::normalize("U1"), None);
    }
}
