use isc_core::network::data::{toy_dataset, Dataset, TOY_CLASSES, TOY_DIM, TOY_SIDE};
use isc_core::network::idx::{write_images, write_labels, IdxImages};
use isc_core::network::train::{train_small_mlp, TrainConfig};
use isc_core::network::weights_file::save_weights;
use isc_core::network::{fixed_point_label, Network};

use super::{csv_writer, Context};
use crate::args::TrainToyArgs;
use crate::error::{CliError, CliResult};
use crate::settings::Settings;

pub struct Plan {
    dims: Vec<usize>,
    epochs: usize,
    lr: f64,
    train_count: usize,
    test_count: usize,
    train_seed: u64,
    test_seed: u64,
}

pub fn resolve(a: TrainToyArgs, s: &mut Settings) -> CliResult<Plan> {
    let plan = Plan {
        dims: s.list("dims", a.dims, vec![TOY_DIM, 8, 8, TOY_CLASSES])?,
        epochs: s.value("epochs", a.epochs, 60)?,
        lr: s.value("lr", a.lr, 0.1)?,
        train_count: s.value("train-count", a.train_count, 800)?,
        test_count: s.value("test-count", a.test_count, 200)?,
        train_seed: s.value("train-seed", a.train_seed, 1)?,
        test_seed: s.value("test-seed", a.test_seed, 2)?,
    };
    if plan.dims.first() != Some(&TOY_DIM) || plan.dims.last() != Some(&TOY_CLASSES) {
        return Err(CliError::Usage(format!(
            "toy dims must start with {TOY_DIM} and end with {TOY_CLASSES}"
        )));
    }
    if plan.train_count == 0 || plan.test_count == 0 {
        return Err(CliError::Usage("train and test counts must be positive".into()));
    }
    Ok(plan)
}

fn fixed_accuracy(net: &Network, d: &Dataset) -> CliResult<f64> {
    let mut hits = 0;
    for (img, &l) in d.images.iter().zip(&d.labels) {
        hits += usize::from(fixed_point_label(img, net)? == l as usize);
    }
    Ok(hits as f64 / d.len() as f64)
}

fn write_split(ctx: &Context, name: &str, d: &Dataset) -> CliResult<()> {
    let images = IdxImages {
        rows: TOY_SIDE,
        cols: TOY_SIDE,
        images: d.images.clone(),
    };
    let ip = ctx.out.join(format!("toy_{name}_images.idx"));
    let lp = ctx.out.join(format!("toy_{name}_labels.idx"));
    write_images(&ip, &images).map_err(|e| CliError::from(e).context(ip.display()))?;
    write_labels(&lp, &d.labels).map_err(|e| CliError::from(e).context(lp.display()))?;
    Ok(())
}

impl Plan {
    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        let train = toy_dataset(self.train_count, self.train_seed);
        let test = toy_dataset(self.test_count, self.test_seed);
        let cfg = TrainConfig {
            dims: self.dims.clone(),
            epochs: self.epochs,
            lr: self.lr,
            seed: ctx.seed,
        };
        let mlp = train_small_mlp(&train.scaled_inputs(), &train.label_indices(), &cfg)?;
        let net = mlp.quantize()?;

        let path = ctx.out.join("toy_weights.json");
        save_weights(&net, &path).map_err(|e| CliError::from(e).context(path.display()))?;
        write_split(ctx, "train", &train)?;
        write_split(ctx, "test", &test)?;

        let mut w = csv_writer(&ctx.out.join("train_toy.csv"))?;
        w.write_record(["split", "samples", "float_accuracy", "fixed_accuracy"])?;
        for (name, d) in [("train", &train), ("test", &test)] {
            let float = mlp.accuracy(&d.scaled_inputs(), &d.label_indices());
            let fixed = fixed_accuracy(&net, d)?;
            w.write_record([name.to_string(), d.len().to_string(), float.to_string(), fixed.to_string()])?;
            println!("{name}: float {float} fixed {fixed}");
        }
        w.flush()?;
        Ok(())
    }
}
