//! Regenerates the committed binary checkpoint fixtures under
//! crates/cli/fixtures. Run with `cargo run -p cli --example gen_fixtures`.

use std::path::Path;

use network::{plant_linear_feature, plant_value_sum, save_checkpoint, zero_checkpoint,
    Checkpoint, NetworkConfig};

fn small_config() -> NetworkConfig {
    NetworkConfig {
        blocks: 2,
        channels: 8,
        ..NetworkConfig::default()
    }
}

/// Value head computes exactly tanh(0.05 * material_diff): channel 0 reads
/// mover material, channel 1 opponent material, value = 0.05 * (sum0 - sum1).
fn material_value_checkpoint(step: u64) -> Checkpoint {
    let mover = [(1, 9.0), (2, 5.0), (3, 3.0), (4, 3.0), (5, 1.0)];
    let mut ck = plant_linear_feature(small_config(), 0, &mover, 0.0);
    for (plane, coeff) in [(7, 9.0), (8, 5.0), (9, 3.0), (10, 3.0), (11, 1.0)] {
        *ck.conv_in.weight_mut(1, plane, 1, 1) = coeff;
    }
    plant_value_sum(&mut ck, 0, 0.05, 0.0);
    *ck.value_conv.weight_mut(0, 1, 0, 0) = -1.0;
    ck.step = step;
    ck
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let zero = zero_checkpoint(small_config());
    save_checkpoint(&zero, &dir.join("ck_zero.azck")).unwrap();
    let material = material_value_checkpoint(64);
    save_checkpoint(&material, &dir.join("ck_material.azck")).unwrap();
    println!("wrote {}", dir.display());
}
