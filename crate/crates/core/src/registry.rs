//! Named constructors for interchangeable algorithm variants.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

type Factory<T, A> = Arc<dyn Fn(&A) -> Result<Box<T>> + Send + Sync>;

/// Maps names to factories producing boxed trait objects from an argument.
pub struct Registry<T: ?Sized, A = ()> {
    kind: &'static str,
    entries: BTreeMap<String, Factory<T, A>>,
}

impl<T: ?Sized, A> Registry<T, A> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn(&A) -> Result<Box<T>> + Send + Sync + 'static,
    ) -> &mut Self {
        self.entries.insert(name.to_string(), Arc::new(factory));
        self
    }

    pub fn create(&self, name: &str, arg: &A) -> Result<Box<T>> {
        match self.entries.get(name) {
            Some(f) => f(arg),
            None => Err(Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            }),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter {
        fn greet(&self) -> String;
    }

    struct Plain(String);

    impl Greeter for Plain {
        fn greet(&self) -> String {
            format!("hello {}", self.0)
        }
    }

    #[test]
    fn creates_registered_and_rejects_unknown() {
        let mut reg: Registry<dyn Greeter, String> = Registry::new("greeter");
        reg.register("plain", |who: &String| Ok(Box::new(Plain(who.clone())) as Box<dyn Greeter>));
        assert_eq!(reg.create("plain", &"x".into()).unwrap().greet(), "hello x");
        let err = reg.create("fancy", &"x".into()).err().unwrap();
        assert!(err.to_string().contains("known: plain"));
        assert_eq!(reg.names(), vec!["plain".to_string()]);
    }
}
