//! Structured captions of the form `An image with 2 chair, 1 table.`

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Detected classes with their instance counts.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct InstanceList {
    entries: Vec<(String, u32)>,
}

impl InstanceList {
    pub fn new(entries: Vec<(String, u32)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("instance list is empty"));
        }
        for (class, count) in &entries {
            if class.trim().is_empty() {
                return Err(Error::InvalidParameter("instance class name is empty".into()));
            }
            if *count == 0 {
                return Err(Error::InvalidParameter(format!("instance '{class}' has count 0")));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(String, u32)] {
        &self.entries
    }
}

pub fn render_structured_caption(instances: &InstanceList) -> String {
    let body: Vec<String> = instances.entries.iter().map(|(c, n)| format!("{n} {c}")).collect();
    format!("An image with {}.", body.join(", "))
}

/// `count` captions, each over an independently shuffled instance order.
pub fn shuffled_captions<R: Rng>(instances: &InstanceList, count: usize, rng: &mut R) -> Vec<String> {
    (0..count)
        .map(|_| {
            let mut entries = instances.entries.clone();
            entries.shuffle(rng);
            render_structured_caption(&InstanceList { entries })
        })
        .collect()
}
