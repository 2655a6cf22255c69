use std::collections::HashMap;

/// Bidirectional token <-> id table. Ids are dense and assigned in
/// first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Return the id of `token`, appending it if unseen.
    pub fn intern(&mut self, token: &str) -> usize {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Entity and relation vocabularies of a knowledge graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub entities: Interner,
    pub relations: Interner,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn encode_decode_round_trip(tokens in prop::collection::vec("[a-z/_0-9]{1,8}", 0..40)) {
            let mut interner = Interner::new();
            let ids: Vec<usize> = tokens.iter().map(|t| interner.intern(t)).collect();
            for (tok, id) in tokens.iter().zip(&ids) {
                prop_assert_eq!(interner.token(*id), Some(tok.as_str()));
                prop_assert_eq!(interner.get(tok), Some(*id));
            }
            // dense, first-seen order
            for (id, tok) in interner.tokens().iter().enumerate() {
                prop_assert_eq!(interner.get(tok), Some(id));
            }
        }
    }
}
