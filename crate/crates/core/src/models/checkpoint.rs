//! Plain-text embedding checkpoints.
//!
//! ```text
//! dim=<d> entities=<n> relations=<m> model=<kind>
//! entity:<id> <v1> ... <vd>
//! relation:<id> <v1> ... <vd>
//! aux:<id> <v1> ... <vd>
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::fs;
use std::path::Path;

use super::{EmbeddingState, Matrix, ModelKind};
use crate::error::{Error, Result};

pub fn render_checkpoint(state: &EmbeddingState, kind: ModelKind) -> String {
    let mut out = format!(
        "dim={} entities={} relations={} model={}\n",
        state.dim(),
        state.num_entities(),
        state.num_relations(),
        kind
    );
    let mut write_block = |label: &str, m: &Matrix| {
        for (i, row) in m.iter_rows().enumerate() {
            out.push_str(label);
            out.push(':');
            out.push_str(&i.to_string());
            for v in row {
                out.push(' ');
                out.push_str(&format!("{v:.16e}"));
            }
            out.push('\n');
        }
    };
    write_block("entity", &state.entities);
    write_block("relation", &state.relations);
    if let Some(aux) = &state.aux {
        write_block("aux", aux);
    }
    out
}

pub fn write_checkpoint(path: &Path, state: &EmbeddingState, kind: ModelKind) -> Result<()> {
    fs::write(path, render_checkpoint(state, kind)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<(EmbeddingState, ModelKind)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text, path)
}

pub fn parse_checkpoint(text: &str, path: &Path) -> Result<(EmbeddingState, ModelKind)> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty checkpoint".into()))?;
    let (mut dim, mut ne, mut nr, mut kind) = (None, None, None, None);
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| err(1, format!("bad header field `{field}`")))?;
        let num = || v.parse::<usize>().map_err(|e| err(1, format!("{k}: {e}")));
        match k {
            "dim" => dim = Some(num()?),
            "entities" => ne = Some(num()?),
            "relations" => nr = Some(num()?),
            "model" => kind = Some(v.parse::<ModelKind>().map_err(|e| err(1, e.to_string()))?),
            _ => return Err(err(1, format!("unknown header field `{k}`"))),
        }
    }
    let (Some(dim), Some(ne), Some(nr), Some(kind)) = (dim, ne, nr, kind) else {
        return Err(err(1, "incomplete header".into()));
    };
    let mut state = EmbeddingState::zeros(ne, nr, dim, kind.has_aux());
    let mut seen = [0usize; 3];
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label = parts.next().unwrap_or_default();
        let (block, id) = label
            .split_once(':')
            .ok_or_else(|| err(n + 1, format!("bad row label `{label}`")))?;
        let id: usize = id.parse().map_err(|e| err(n + 1, format!("row id: {e}")))?;
        let (slot, matrix) = match block {
            "entity" => (0, Some(&mut state.entities)),
            "relation" => (1, Some(&mut state.relations)),
            "aux" => (2, state.aux.as_mut()),
            _ => return Err(err(n + 1, format!("unknown block `{block}`"))),
        };
        let matrix = matrix.ok_or_else(|| err(n + 1, format!("{kind} has no aux block")))?;
        if id >= matrix.rows() {
            return Err(err(n + 1, format!("row id {id} out of range")));
        }
        let values: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(n + 1, format!("value: {e}")))?;
        if values.len() != dim {
            return Err(err(n + 1, format!("expected {dim} values, found {}", values.len())));
        }
        matrix.row_mut(id).copy_from_slice(&values);
        seen[slot] += 1;
    }
    let expected_aux = if kind.has_aux() { nr } else { 0 };
    if seen != [ne, nr, expected_aux] {
        return Err(err(0, format!("row counts {seen:?} do not match header")));
    }
    Ok((state, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model, Norm};
    use crate::rng::seeded;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_lossless(seed in any::<u64>(), ne in 1usize..6, nr in 1usize..4, half_dim in 1usize..5, kind_idx in 0usize..4) {
            let kind = ModelKind::ALL[kind_idx];
            let model = Model::new(kind, Norm::L1);
            let mut state = model.init_state(ne, nr, half_dim * 2, &mut seeded(seed)).unwrap();
            // include awkward values
            state.entities.row_mut(0)[0] = 1.0 / 3.0;
            state.entities.row_mut(0)[1] = -5e-324;
            let text = render_checkpoint(&state, kind);
            let (back, k) = parse_checkpoint(&text, Path::new("x")).unwrap();
            prop_assert_eq!(k, kind);
            prop_assert_eq!(back, state);
        }
    }

    #[test]
    fn header_format() {
        let s = EmbeddingState::zeros(2, 1, 3, false);
        let text = render_checkpoint(&s, ModelKind::TransE);
        assert!(text.starts_with("dim=3 entities=2 relations=1 model=TransE\nentity:0 "));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let s = EmbeddingState::zeros(2, 1, 3, false);
        let text = render_checkpoint(&s, ModelKind::TransE);
        let cut: String = text.lines().take(2).collect::<Vec<_>>().join("\n");
        assert!(parse_checkpoint(&cut, Path::new("x")).is_err());
    }
}
