use chesscore::{
    attacks_to, emit_fen, legal_moves, parse_fen, perft, pinned_squares, Color, FenError, Move,
    PieceKind, Position, Square,
};

const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

#[test]
fn parse_start_fen() {
    let pos = parse_fen(START_FEN).unwrap();
    assert_eq!(Square::all().filter(|&s| pos.occupied(s)).count(), 32);
    assert_eq!(pos.side_to_move(), Color::White);
    let c = pos.castling();
    assert!(c.white_kingside && c.white_queenside && c.black_kingside && c.black_queenside);
}

#[test]
fn parse_fen_missing_kings() {
    assert_eq!(
        parse_fen("8/8/8/8/8/8/8/8 w - - 0 1"),
        Err(FenError::MissingKing(Color::White))
    );
}

#[test]
fn parse_fen_pawn_on_back_rank() {
    let err = parse_fen("P3k3/8/8/8/8/8/8/4K3 w - - 0 1").unwrap_err();
    assert!(matches!(err, FenError::PawnOnBackRank(_)));
}

#[test]
fn parse_fen_inconsistent_castling() {
    let err = parse_fen("4k3/8/8/8/8/8/8/4K3 w K - 0 1").unwrap_err();
    assert_eq!(err, FenError::CastlingInconsistent('K'));
}

#[test]
fn parse_fen_knight_position_round_trips() {
    let fen = "r3k3/2N5/8/8/8/8/8/4K3 w - - 0 1";
    let pos = parse_fen(fen).unwrap();
    assert_eq!(Square::all().filter(|&s| pos.occupied(s)).count(), 4);
    let c7 = Square::from_name("c7").unwrap();
    let p = pos.piece_at(c7).unwrap();
    assert_eq!((p.kind, p.color), (PieceKind::Knight, Color::White));
    assert_eq!(emit_fen(&pos), fen);
}

#[test]
fn emit_fen_start() {
    assert_eq!(emit_fen(&Position::start()), START_FEN);
}

#[test]
fn en_passant_always_emitted_after_double_push() {
    let pos = Position::start();
    let next = pos.make_move(Move::from_uci("e2e4").unwrap()).unwrap();
    assert_eq!(
        emit_fen(&next),
        "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1"
    );
}

#[test]
fn twenty_legal_moves_at_start() {
    assert_eq!(legal_moves(&Position::start()).len(), 20);
}

#[test]
fn checkmate_has_no_moves() {
    // Back-rank mate.
    let pos = parse_fen("R5k1/5ppp/8/8/8/8/8/4K3 b - - 0 1").unwrap();
    assert!(pos.is_check());
    assert!(legal_moves(&pos).is_empty());
}

#[test]
fn stalemate_has_no_moves_and_no_check() {
    let pos = parse_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
    assert!(!pos.is_check());
    assert!(legal_moves(&pos).is_empty());
}

#[test]
fn perft_small_depths() {
    let start = Position::start();
    assert_eq!(perft(&start, 0), 1);
    assert_eq!(perft(&start, 1), 20);
    assert_eq!(perft(&start, 2), 400);
    assert_eq!(perft(&start, 3), 8902);
}

#[test]
fn attacks_to_start_e4_empty() {
    let pos = Position::start();
    let e4 = Square::from_name("e4").unwrap();
    assert!(attacks_to(&pos, e4, Color::White).is_empty());
}

#[test]
fn knight_attacks_corner() {
    let pos = parse_fen("r3k3/2N5/8/8/8/8/8/4K3 w - - 0 1").unwrap();
    let a8 = Square::from_name("a8").unwrap();
    assert_eq!(
        attacks_to(&pos, a8, Color::White),
        vec![Square::from_name("c7").unwrap()]
    );
}

#[test]
fn rook_attacks_along_open_file() {
    let pos = parse_fen("4k3/8/8/8/8/8/8/4RK2 b - - 0 1").unwrap();
    let e8 = Square::from_name("e8").unwrap();
    assert_eq!(
        attacks_to(&pos, e8, Color::White),
        vec![Square::from_name("e1").unwrap()]
    );
}

#[test]
fn no_pins_at_start() {
    assert!(pinned_squares(&Position::start(), Color::White).is_empty());
}

#[test]
fn diagonal_pin_detected() {
    // Black bishop on a5, white knight on d2, white king on e1.
    let pos = parse_fen("4k3/8/8/b7/8/8/3N4/4K3 w - - 0 1").unwrap();
    let pins = pinned_squares(&pos, Color::White);
    assert_eq!(
        pins.into_iter().collect::<Vec<_>>(),
        vec![Square::from_name("d2").unwrap()]
    );
}

#[test]
fn make_move_e4_sets_en_passant() {
    let next = Position::start()
        .make_move(Move::from_uci("e2e4").unwrap())
        .unwrap();
    assert_eq!(next.side_to_move(), Color::Black);
    assert_eq!(next.en_passant(), Some(Square::from_name("e3").unwrap()));
}

#[test]
fn make_move_rejects_illegal() {
    assert!(Position::start()
        .make_move(Move::from_uci("e2e5").unwrap())
        .is_err());
}

#[test]
fn castling_moves_rook_and_clears_rights() {
    let pos = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
    let next = pos.make_move(Move::from_uci("e1g1").unwrap()).unwrap();
    assert_eq!(
        next.piece_at(Square::from_name("g1").unwrap()).unwrap().kind,
        PieceKind::King
    );
    assert_eq!(
        next.piece_at(Square::from_name("f1").unwrap()).unwrap().kind,
        PieceKind::Rook
    );
    assert!(!next.occupied(Square::from_name("h1").unwrap()));
    assert!(!next.castling().white_kingside);
    assert!(!next.castling().white_queenside);
    assert!(next.castling().black_kingside);
}

#[test]
fn pawn_move_and_capture_reset_halfmove_clock() {
    let pos = parse_fen("4k3/8/8/3p4/4P3/8/8/4K2R w K - 7 20").unwrap();
    let quiet = pos.make_move(Move::from_uci("h1h2").unwrap()).unwrap();
    assert_eq!(quiet.halfmove_clock(), 8);
    let capture = pos.make_move(Move::from_uci("e4d5").unwrap()).unwrap();
    assert_eq!(capture.halfmove_clock(), 0);
}

#[test]
fn en_passant_capture_removes_pawn() {
    let pos = parse_fen("4k3/8/8/8/4p3/8/3P4/4K3 w - - 0 1")
        .unwrap()
        .make_move(Move::from_uci("d2d4").unwrap())
        .unwrap();
    assert_eq!(pos.en_passant(), Some(Square::from_name("d3").unwrap()));
    let after = pos.make_move(Move::from_uci("e4d3").unwrap()).unwrap();
    assert!(!after.occupied(Square::from_name("d4").unwrap()));
    assert!(after
        .piece_at(Square::from_name("d3").unwrap())
        .is_some_and(|p| p.kind == PieceKind::Pawn && p.color == Color::Black));
}

#[test]
fn promotion_requires_last_rank() {
    let pos = parse_fen("4k3/P7/8/8/8/8/8/4K3 w - - 0 1").unwrap();
    let moves = legal_moves(&pos);
    let promos: Vec<&Move> = moves
        .iter()
        .filter(|m| m.from == Square::from_name("a7").unwrap())
        .collect();
    assert_eq!(promos.len(), 4);
    assert!(promos.iter().all(|m| m.promotion.is_some()));
}
