use chesscore::{parse_fen, Position};
use encoding::{encode_input, move_to_policy_index, InputTensor};
use network::{
    checkpoint_file_size, forward, load_checkpoint, plant_linear_feature, plant_policy_move,
    plant_value_sum, random_checkpoint, save_checkpoint, zero_checkpoint, NetworkConfig,
    NetworkError,
};

fn start_input() -> InputTensor {
    encode_input(&[Position::start()], 1).unwrap()
}

#[test]
fn zero_checkpoint_is_all_zero() {
    let ck = zero_checkpoint(NetworkConfig::default());
    let (out, acts) = forward(&ck, &start_input()).unwrap();
    assert_eq!(out.value, 0.0);
    assert!(out.policy.iter().all(|&p| p == 0.0));
    assert_eq!(acts.num_layers(), 4);
    for l in 1..=acts.num_layers() {
        assert!(acts.layer(l).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn zero_residual_blocks_preserve_z1_exactly() {
    let mut ck = random_checkpoint(NetworkConfig::default(), 5, 1.0);
    for block in &mut ck.residual {
        block.conv1.weight.fill(0.0);
        block.conv1.bias.fill(0.0);
        block.conv2.weight.fill(0.0);
        block.conv2.bias.fill(0.0);
    }
    let (_, acts) = forward(&ck, &start_input()).unwrap();
    let z1 = acts.layer(1).to_vec();
    for l in 2..=acts.num_layers() {
        assert_eq!(acts.layer(l), &z1[..], "layer {l} must equal z1 bitwise");
    }
}

#[test]
fn planted_pawn_indicator_persists_to_all_layers() {
    // Plane 5 is the mover's pawn plane.
    let ck = plant_linear_feature(NetworkConfig::default(), 3, &[(5, 1.0)], 0.0);
    let x = start_input();
    let (_, acts) = forward(&ck, &x).unwrap();
    for l in 1..=acts.num_layers() {
        for row in 0..8 {
            for col in 0..8 {
                assert_eq!(acts.get(l, row, col, 3), x.get(5, row, col));
            }
        }
    }
    // Other channels stay zero.
    assert!(acts.layer(4).iter().skip(4 * 64).all(|&v| v == 0.0));
}

#[test]
fn planted_pawn_difference_with_offset() {
    // Mover pawns +1, opponent pawns -1, bias 8.
    let ck = plant_linear_feature(NetworkConfig::default(), 0, &[(5, 1.0), (11, -1.0)], 8.0);
    let (_, acts) = forward(&ck, &start_input()).unwrap();
    for row in 0..8 {
        for col in 0..8 {
            let expected = match row {
                1 => 9.0,
                6 => 7.0,
                _ => 8.0,
            };
            assert_eq!(acts.get(4, row, col, 0), expected);
        }
    }
}

#[test]
fn activations_clip_at_clip_max() {
    let ck = plant_linear_feature(NetworkConfig::default(), 0, &[], 20.0);
    let (_, acts) = forward(&ck, &start_input()).unwrap();
    assert!(acts.layer(1).iter().take(64).all(|&v| v == 15.0));
    let neg = plant_linear_feature(NetworkConfig::default(), 0, &[], -5.0);
    let (_, acts) = forward(&neg, &start_input()).unwrap();
    assert!(acts.layer(1).iter().all(|&v| v == 0.0));
}

#[test]
fn two_planted_channels_do_not_interfere() {
    let solo0 = plant_linear_feature(NetworkConfig::default(), 0, &[(5, 1.0)], 0.0);
    let solo7 = plant_linear_feature(NetworkConfig::default(), 7, &[(11, 1.0)], 0.0);
    // Plant both features in one checkpoint.
    let mut ck = solo0.clone();
    *ck.conv_in.weight_mut(7, 11, 1, 1) = 1.0;
    let solo0 = forward(&solo0, &start_input()).unwrap().1;
    let solo7 = forward(&solo7, &start_input()).unwrap().1;
    let both = forward(&ck, &start_input()).unwrap().1;
    for row in 0..8 {
        for col in 0..8 {
            assert_eq!(both.get(4, row, col, 0), solo0.get(4, row, col, 0));
            assert_eq!(both.get(4, row, col, 7), solo7.get(4, row, col, 7));
        }
    }
}

#[test]
fn planted_feature_is_translation_local() {
    // Channel reads the mover-knight plane (4); removing a far-away rook
    // must not change the planted values anywhere.
    let ck = plant_linear_feature(NetworkConfig::default(), 2, &[(4, 1.0)], 0.0);
    let a = parse_fen("4k3/8/8/8/8/8/8/N3K2R w K - 0 1").unwrap();
    let b = parse_fen("4k3/8/8/8/8/8/8/N3K3 w - - 0 1").unwrap();
    let (_, za) = forward(&ck, &encode_input(&[a], 1).unwrap()).unwrap();
    let (_, zb) = forward(&ck, &encode_input(&[b], 1).unwrap()).unwrap();
    for l in 1..=4 {
        for row in 0..8 {
            for col in 0..8 {
                assert_eq!(za.get(l, row, col, 2), zb.get(l, row, col, 2));
            }
        }
    }
}

#[test]
fn forward_is_deterministic() {
    let ck = random_checkpoint(NetworkConfig::default(), 11, 1.0);
    let x = start_input();
    let (a, za) = forward(&ck, &x).unwrap();
    let (b, zb) = forward(&ck, &x).unwrap();
    assert_eq!(a, b);
    assert_eq!(za, zb);
}

#[test]
fn random_checkpoints_are_seeded_and_bounded() {
    let cfg = NetworkConfig::default();
    assert_eq!(random_checkpoint(cfg, 1, 1.0), random_checkpoint(cfg, 1, 1.0));
    let a = random_checkpoint(cfg, 1, 1.0);
    let b = random_checkpoint(cfg, 2, 1.0);
    let (oa, za) = forward(&a, &start_input()).unwrap();
    let (ob, _) = forward(&b, &start_input()).unwrap();
    assert_ne!(oa.policy, ob.policy);
    assert!(oa.value.is_finite() && oa.value.abs() < 1.0);
    for l in 1..=za.num_layers() {
        assert!(za.layer(l).iter().all(|&v| (0.0..=15.0).contains(&v)));
    }
}

#[test]
fn forward_rejects_shape_mismatch() {
    let ck = zero_checkpoint(NetworkConfig::default()); // h = 1
    let x = encode_input(&[Position::start()], 2).unwrap();
    assert!(matches!(
        forward(&ck, &x),
        Err(NetworkError::ShapeMismatch { .. })
    ));
}

#[test]
fn planted_value_head_computes_scaled_sum() {
    let mut ck = plant_linear_feature(NetworkConfig::default(), 0, &[(5, 1.0)], 0.0);
    plant_value_sum(&mut ck, 0, 0.25, 4.0);
    // Start position: 8 mover pawns -> sum 8; tanh(0.25 * (8 - 4)) = tanh(1).
    let (out, _) = forward(&ck, &start_input()).unwrap();
    assert!((out.value - 1.0f32.tanh()).abs() < 1e-6, "{}", out.value);
}

#[test]
fn planted_policy_head_boosts_one_move() {
    let pos = parse_fen("4k3/8/8/8/8/8/P7/4K3 w - - 0 1").unwrap();
    let m = chesscore::Move::from_uci("a2a3").unwrap();
    let idx = move_to_policy_index(&pos, m).unwrap();
    // Channel 0 carries the mover-pawn indicator; the planted plane peaks at
    // the pawn's from-square.
    let mut ck = plant_linear_feature(NetworkConfig::default(), 0, &[(5, 1.0)], 0.0);
    plant_policy_move(&mut ck, 0, idx, 5.0);
    let (out, _) = forward(&ck, &encode_input(&[pos], 1).unwrap()).unwrap();
    let best = out
        .policy
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    assert_eq!(best.0, idx.flat());
    assert_eq!(*best.1, 5.0);
}

#[test]
fn checkpoint_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.azpw");
    let p2 = dir.path().join("b.azpw");
    let ck = random_checkpoint(NetworkConfig::default(), 3, 0.7);
    save_checkpoint(&ck, &p1).unwrap();
    let loaded = load_checkpoint(&p1).unwrap();
    assert_eq!(loaded, ck);
    save_checkpoint(&loaded, &p2).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
}

#[test]
fn checkpoint_file_size_matches_formula() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.azpw");
    let cfg = NetworkConfig::default();
    save_checkpoint(&zero_checkpoint(cfg), &path).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap().len(),
        checkpoint_file_size(&cfg)
    );
}

#[test]
fn corrupted_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.azpw");
    let ck = zero_checkpoint(NetworkConfig::default());
    save_checkpoint(&ck, &path).unwrap();

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(load_checkpoint(&path), Err(NetworkError::BadMagic)));

    let good = {
        bytes[0] = b'A';
        bytes.clone()
    };
    std::fs::write(&path, &good[..good.len() - 5]).unwrap();
    assert!(matches!(load_checkpoint(&path), Err(NetworkError::Truncated)));

    let mut versioned = good.clone();
    versioned[4] = 9;
    std::fs::write(&path, &versioned).unwrap();
    assert!(matches!(
        load_checkpoint(&path),
        Err(NetworkError::BadVersion(9))
    ));
}
