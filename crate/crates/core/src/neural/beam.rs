//! Beam-search decoding over the extended vocabulary, plus lexeme-level
//! prediction on top of it.

use crate::scalar::Scalar;

use super::encoding::{EncodedTap, ModelVocab, PAD_ID, START_ID, STOP_ID, UNK_ID};
use super::model::{DecState, Seq2SeqModel};
use super::NeuralError;

/// One decoded hypothesis. `tokens` are extended-vocabulary ids and
/// include the stop symbol when (and only when) the hypothesis finished
/// on its own before `max_len` ran out.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub finished: bool,
}

/// A hypothesis with its position in the session graph.
struct Hyp {
    tokens: Vec<usize>,
    log_prob: f64,
    finished: bool,
    state: DecState,
    /// Creation stamp; earlier wins log-probability ties, which also makes
    /// width-1 search identical to greedy argmax with smallest-id ties.
    created: u64,
}

/// Candidate for the next beam: either a frozen finished hypothesis
/// carried over or a one-token extension of a live one.
struct Candidate {
    parent: usize,
    token: Option<usize>,
    log_prob: f64,
    created: u64,
}

/// Special ids never proposed during decoding: padding and the sequence
/// start are structural, and the unknown marker must not be emitted as an
/// assertion token (copy handles out-of-vocabulary content instead).
const BANNED: [usize; 3] = [PAD_ID, START_ID, UNK_ID];

/// Searches for the `k` most likely target sequences, each at most
/// `max_len` tokens (the stop symbol counts). Finished hypotheses stay
/// frozen but keep competing on total log probability.
pub fn beam_search<F: Scalar>(
    model: &Seq2SeqModel<F>,
    tap: &EncodedTap,
    k: usize,
    max_len: usize,
) -> Result<Vec<BeamHypothesis>, NeuralError> {
    assert!(k >= 1, "beam width must be at least 1");
    let mut session = model.session();
    let enc = session.encode(&tap.input_embed_ids)?;
    let root = session.bridge(&enc);
    let ext_size = session.ext_size(tap);

    let mut hyps = vec![Hyp {
        tokens: Vec::new(),
        log_prob: 0.0,
        finished: false,
        state: root,
        created: 0,
    }];
    let mut counter: u64 = 1;

    for _ in 0..max_len {
        if hyps.iter().all(|h| h.finished) {
            break;
        }
        let mut candidates: Vec<Candidate> = Vec::new();
        let mut next_states: Vec<Option<DecState>> = Vec::with_capacity(hyps.len());
        for (idx, hyp) in hyps.iter().enumerate() {
            if hyp.finished {
                next_states.push(None);
                candidates.push(Candidate {
                    parent: idx,
                    token: None,
                    log_prob: hyp.log_prob,
                    created: hyp.created,
                });
                continue;
            }
            let prev = *hyp.tokens.last().unwrap_or(&START_ID);
            let step = session.decode_step(&enc, &hyp.state, prev, &tap.input_ext_ids, ext_size, None);
            next_states.push(Some(step.state));
            let dist = session.graph.values(step.dist);
            for (t, &p) in dist.iter().enumerate() {
                if BANNED.contains(&t) {
                    continue;
                }
                candidates.push(Candidate {
                    parent: idx,
                    token: Some(t),
                    log_prob: hyp.log_prob + p.to_f64().ln(),
                    created: counter,
                });
                counter += 1;
            }
        }
        candidates.sort_by(|a, b| {
            b.log_prob
                .total_cmp(&a.log_prob)
                .then(a.created.cmp(&b.created))
        });
        candidates.truncate(k);

        let next: Vec<Hyp> = candidates
            .into_iter()
            .map(|c| match c.token {
                None => {
                    let parent = &hyps[c.parent];
                    Hyp {
                        tokens: parent.tokens.clone(),
                        log_prob: parent.log_prob,
                        finished: true,
                        state: parent.state,
                        created: c.created,
                    }
                }
                Some(t) => {
                    let parent = &hyps[c.parent];
                    let mut tokens = Vec::with_capacity(parent.tokens.len() + 1);
                    tokens.extend_from_slice(&parent.tokens);
                    tokens.push(t);
                    Hyp {
                        tokens,
                        log_prob: c.log_prob,
                        finished: t == STOP_ID,
                        state: next_states[c.parent].expect("live parent has a next state"),
                        created: c.created,
                    }
                }
            })
            .collect();
        hyps = next;
    }

    hyps.sort_by(|a, b| {
        b.log_prob
            .total_cmp(&a.log_prob)
            .then(a.created.cmp(&b.created))
    });
    Ok(hyps
        .into_iter()
        .map(|h| BeamHypothesis {
            tokens: h.tokens,
            log_prob: h.log_prob,
            finished: h.finished,
        })
        .collect())
}

/// A decoded candidate mapped back to lexemes.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub tokens: Vec<String>,
    pub log_prob: f64,
    pub finished: bool,
}

/// Runs beam search, strips the stop symbol, and resolves ids to lexemes.
/// Extended ids (at or past the base vocabulary) come from the TAP's own
/// out-of-vocabulary input tokens.
pub fn predict<F: Scalar>(
    model: &Seq2SeqModel<F>,
    tap: &EncodedTap,
    vocab: &ModelVocab,
    k: usize,
    max_len: usize,
) -> Result<Vec<Prediction>, NeuralError> {
    let base = vocab.len();
    assert_eq!(
        base,
        model.hyper().vocab_size,
        "vocabulary must match the model"
    );
    let hyps = beam_search(model, tap, k, max_len)?;
    Ok(hyps
        .into_iter()
        .map(|h| {
            let tokens = h
                .tokens
                .iter()
                .filter(|&&t| t != STOP_ID)
                .map(|&t| {
                    if t < base {
                        vocab.lexeme(t).expect("id within vocabulary").to_string()
                    } else {
                        tap.oov_lexemes[t - base].clone()
                    }
                })
                .collect();
            Prediction {
                tokens,
                log_prob: h.log_prob,
                finished: h.finished,
            }
        })
        .collect())
}
