//! The global properties array: one string map per request, shared by every
//! stage of processing. Keys are namespaced with one of the prefixes in
//! [`NAMESPACES`]; a key without a recognised prefix is rejected on write.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Recognised key prefixes, each ending in a dot.
pub const NAMESPACES: [&str; 5] = ["CONFIG.", "FORM.", "VAR.", "ERROR.", "SERIAL."];

/// Per-request map of namespaced keys to string values.
///
/// Values are uninterpreted: they may contain newlines, `[[`, `=`, or
/// anything else (serialised form HTML round-trips through here). An absent
/// key is distinguishable from a key bound to the empty string. The map is
/// confined to one request and never shared between concurrent requests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyMap {
    entries: BTreeMap<String, String>,
}

impl PropertyMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// True when `key` is a recognised prefix followed by a nonempty name.
    pub fn is_namespaced(key: &str) -> bool {
        NAMESPACES
            .iter()
            .any(|prefix| key.len() > prefix.len() && key.starts_with(prefix))
    }

    /// Looks up a key. Absence is a value here, not an error.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Binds `key` to `value`, replacing any previous binding.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !Self::is_namespaced(key) {
            return Err(Error::BadKey {
                key: key.to_string(),
            });
        }
        self.entries.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Removes `key`; removing an absent key is a no-op.
    pub fn unset(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Copies every entry of `other` into this map, overwriting collisions.
    pub fn merge(&mut self, other: &PropertyMap) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_returns_bound_value() {
        let mut props = PropertyMap::new();
        props.set("VAR.vExclaim", "comments").unwrap();
        assert_eq!(props.get("VAR.vExclaim"), Some("comments"));
    }

    #[test]
    fn get_on_empty_map_is_absent() {
        let props = PropertyMap::new();
        assert_eq!(props.get("VAR.x"), None);
    }

    #[test]
    fn form_entries_round_trip() {
        let mut props = PropertyMap::new();
        props.set("FORM.page", "feedback").unwrap();
        assert_eq!(props.get("FORM.page"), Some("feedback"));
    }

    #[test]
    fn set_overwrites() {
        let mut props = PropertyMap::new();
        props.set("VAR.k", "a").unwrap();
        props.set("VAR.k", "b").unwrap();
        assert_eq!(props.get("VAR.k"), Some("b"));
    }

    #[test]
    fn set_rejects_unprefixed_key() {
        let mut props = PropertyMap::new();
        let err = props.set("noPrefix", "x").unwrap_err();
        assert!(matches!(err, Error::BadKey { .. }));
        assert!(props.is_empty());
    }

    #[test]
    fn set_rejects_prefix_without_name() {
        let mut props = PropertyMap::new();
        assert!(props.set("VAR.", "x").is_err());
        assert!(props.set("CONFIG", "x").is_err());
    }

    #[test]
    fn unset_then_get_is_absent() {
        let mut props = PropertyMap::new();
        props.set("VAR.vCurrentDate", "10th May 2011").unwrap();
        assert_eq!(props.get("VAR.vCurrentDate"), Some("10th May 2011"));
        props.unset("VAR.vCurrentDate");
        assert_eq!(props.get("VAR.vCurrentDate"), None);
    }

    #[test]
    fn unset_absent_is_noop() {
        let mut props = PropertyMap::new();
        props.unset("VAR.missing");
        assert!(props.is_empty());
    }

    #[test]
    fn set_unset_set_sequence() {
        let mut props = PropertyMap::new();
        props.set("VAR.k", "v1").unwrap();
        props.unset("VAR.k");
        props.set("VAR.k", "v2").unwrap();
        assert_eq!(props.get("VAR.k"), Some("v2"));
    }

    #[test]
    fn empty_value_is_distinct_from_absent() {
        let mut props = PropertyMap::new();
        props.set("FORM.comments", "").unwrap();
        assert_eq!(props.get("FORM.comments"), Some(""));
        assert!(props.contains("FORM.comments"));
        assert!(!props.contains("FORM.fullname"));
    }

    #[test]
    fn every_namespace_accepted() {
        let mut props = PropertyMap::new();
        for prefix in NAMESPACES {
            props.set(&format!("{prefix}name"), "v").unwrap();
        }
        assert_eq!(props.len(), 5);
    }

    #[test]
    fn values_are_uninterpreted() {
        let mut props = PropertyMap::new();
        let html = "<input value=\"[[x]]\"/>\nline two";
        props.set("SERIAL.form", html).unwrap();
        assert_eq!(props.get("SERIAL.form"), Some(html));
    }

    #[test]
    fn set_and_unset_touch_exactly_one_key() {
        let mut props = PropertyMap::new();
        props.set("VAR.a", "1").unwrap();
        props.set("FORM.b", "2").unwrap();
        let before = props.clone();

        props.set("VAR.c", "3").unwrap();
        props.unset("VAR.c");
        assert_eq!(props, before);

        props.set("VAR.a", "changed").unwrap();
        assert_eq!(props.get("FORM.b"), Some("2"));
    }

    proptest::proptest! {
        /// set accepts a key exactly when it matches the prefix grammar.
        #[test]
        fn key_validation_is_total(key in "(CONFIG|FORM|VAR|ERROR|SERIAL|BOGUS|var)?\\.?[a-zA-Z.]{0,6}") {
            let grammar_ok = NAMESPACES
                .iter()
                .any(|p| key.len() > p.len() && key.starts_with(p));
            let mut props = PropertyMap::new();
            proptest::prop_assert_eq!(props.set(&key, "v").is_ok(), grammar_ok);
            proptest::prop_assert_eq!(props.get(&key).is_some(), grammar_ok);
        }

        /// get after set yields the value; get after unset yields absent.
        #[test]
        fn set_get_unset_round_trip(name in "[a-z]{1,8}", value in "\\PC{0,16}") {
            let key = format!("VAR.{name}");
            let mut props = PropertyMap::new();
            props.set(&key, value.clone()).unwrap();
            proptest::prop_assert_eq!(props.get(&key), Some(value.as_str()));
            props.unset(&key);
            proptest::prop_assert_eq!(props.get(&key), None);
        }
    }
}
