//! Read-only check of a weight file; writes nothing.

use isc_core::network::weights_file::load_weights;

use crate::args::ValidateArgs;
use crate::error::{CliError, CliResult};
use crate::settings::join;

pub fn run(a: &ValidateArgs) -> CliResult<()> {
    let net = load_weights(&a.file).map_err(|e| CliError::from(e).context(a.file.display()))?;
    let dims = net.layer_dims();
    if let Some(want) = &a.dims {
        if &dims != want {
            return Err(CliError::Validation(format!(
                "{}: layer dims {} but {} required",
                a.file.display(),
                join(&dims),
                join(want)
            )));
        }
    }
    let params: usize = dims.windows(2).map(|d| (d[0] + 1) * d[1]).sum();
    println!("ok: {} dims {} parameters {params}", a.file.display(), join(&dims));
    Ok(())
}
