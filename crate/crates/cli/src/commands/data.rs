//! Evaluation inputs: IDX files or the built-in toy task.

use std::path::Path;

use isc_core::network::data::toy_dataset;
use isc_core::network::idx::{read_images, read_labels};

use crate::args::DataArgs;
use crate::error::{CliError, CliResult};
use crate::settings::Settings;

const TOY_COUNT: usize = 200;
const TOY_SEED: u64 = 2;

#[derive(Debug)]
pub struct DataSpec {
    images: Option<String>,
    labels: Option<String>,
    toy_count: usize,
    toy_seed: u64,
    limit: Option<usize>,
}

pub struct Inputs {
    pub images: Vec<Vec<u8>>,
    pub labels: Option<Vec<u8>>,
}

impl Inputs {
    pub fn labels(&self) -> CliResult<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --labels with --images".into()))
    }
}

pub fn resolve(a: DataArgs, s: &mut Settings) -> CliResult<DataSpec> {
    let spec = DataSpec {
        images: s.optional("images", a.images)?,
        labels: s.optional("labels", a.labels)?,
        toy_count: s.value("toy-count", a.toy_count, TOY_COUNT)?,
        toy_seed: s.value("toy-seed", a.toy_seed, TOY_SEED)?,
        limit: s.optional("limit", a.limit)?,
    };
    if spec.labels.is_some() && spec.images.is_none() {
        return Err(CliError::Usage("--labels needs --images".into()));
    }
    if spec.limit == Some(0) {
        return Err(CliError::Usage("--limit 0 selects an empty evaluation set".into()));
    }
    Ok(spec)
}

impl DataSpec {
    pub fn load(&self) -> CliResult<Inputs> {
        let (mut images, mut labels) = match &self.images {
            Some(path) => {
                let images = read_images(Path::new(path)).map_err(|e| CliError::from(e).context(path))?.images;
                let labels = match &self.labels {
                    Some(lp) => Some(read_labels(Path::new(lp)).map_err(|e| CliError::from(e).context(lp))?),
                    None => None,
                };
                (images, labels)
            }
            None => {
                let d = toy_dataset(self.toy_count, self.toy_seed);
                (d.images, Some(d.labels))
            }
        };
        if let Some(l) = &labels {
            if l.len() != images.len() {
                return Err(CliError::Validation(format!(
                    "{} images but {} labels",
                    images.len(),
                    l.len()
                )));
            }
        }
        if let Some(k) = self.limit {
            images.truncate(k);
            if let Some(l) = labels.as_mut() {
                l.truncate(k);
            }
        }
        if images.is_empty() {
            return Err(CliError::Usage("evaluation set is empty".into()));
        }
        Ok(Inputs { images, labels })
    }
}
