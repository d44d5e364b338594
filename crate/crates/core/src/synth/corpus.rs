use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::SynthConfig;
use crate::harness::Interview;
use crate::ranking::ValueId;
use crate::taxonomy::ValueTaxonomy;

const TEMPLATES: [&str; 8] = [
    "I would say {cue} has always mattered to me.",
    "When I was younger, {cue} was part of everyday life at home.",
    "My friends often tell me that {cue} is what I talk about most.",
    "At work I keep coming back to {cue}, honestly.",
    "Looking back, {cue} shaped a lot of my decisions.",
    "We argued about {cue} in the family more than once.",
    "If I think about the future, {cue} is on my mind.",
    "It is hard to explain, but {cue} gives me a sense of direction.",
];

const FILLER: [&str; 6] = [
    "We moved house twice when I was a child.",
    "The weather that year was unusually cold.",
    "I have two brothers and a sister.",
    "The interview room is quite warm, isn't it?",
    "Anyway, that is a long story.",
    "I started working when I was nineteen.",
];

const OCCUPATIONS: [&str; 8] = [
    "nurse", "farmer", "teacher", "engineer", "shop owner", "student", "retired clerk", "musician",
];
const SETTINGS: [&str; 3] = ["small village", "mid-sized town", "large city"];

/// Phrases that signal a basic value: its subvalue names, or the value's
/// own name when the taxonomy lists no subvalues for it.
pub fn cue_phrases(taxonomy: &ValueTaxonomy, value: &ValueId) -> Vec<String> {
    let subs: Vec<String> = taxonomy
        .subvalues()
        .iter()
        .filter(|s| taxonomy.basic_of(s) == Some(value))
        .map(|s| s.as_str().replace('-', " "))
        .collect();
    if subs.is_empty() {
        vec![value.as_str().replace('-', " ")]
    } else {
        subs
    }
}

/// Synthetic transcripts whose value cues follow the latent truths: the
/// i-th truth value is mentioned with weight `k + 3 - i`, every other value
/// with weight 1.
pub fn synth_corpus(
    cfg: &SynthConfig,
    truths: &[(String, Vec<ValueId>)],
    taxonomy: &ValueTaxonomy,
) -> Vec<Interview> {
    let values: Vec<ValueId> = cfg.values.iter().map(|v| ValueId::new(v)).collect();
    let mut out = Vec::with_capacity(truths.len());
    for (u, (id, truth)) in truths.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_c0de);
        rng.set_stream(u as u64);
        let weights: Vec<f64> = values
            .iter()
            .map(|v| match truth.iter().position(|t| t == v) {
                Some(i) => (cfg.k + 3 - i) as f64,
                None => 1.0,
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut sentences = Vec::with_capacity(cfg.sentences);
        for s in 0..cfg.sentences {
            if s % 5 == 4 {
                sentences.push(FILLER.choose(&mut rng).unwrap().to_string());
                continue;
            }
            let mut x = rng.gen::<f64>() * total;
            let mut pick = values.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if x < *w {
                    pick = i;
                    break;
                }
                x -= w;
            }
            let cues = cue_phrases(taxonomy, &values[pick]);
            let cue = cues.choose(&mut rng).unwrap();
            let template = TEMPLATES.choose(&mut rng).unwrap();
            sentences.push(template.replace("{cue}", cue));
        }
        let mut transcript = String::new();
        for (i, s) in sentences.iter().enumerate() {
            transcript.push_str(s);
            transcript.push(if i % 6 == 5 { '\n' } else { ' ' });
        }
        let profile = format!(
            "{}-year-old {} from a {}.",
            rng.gen_range(19..80),
            OCCUPATIONS.choose(&mut rng).unwrap(),
            SETTINGS.choose(&mut rng).unwrap()
        );
        out.push(Interview {
            id: id.clone(),
            transcript: transcript.trim_end().to_string() + "\n",
            profile: Some(profile),
        });
    }
    out
}
