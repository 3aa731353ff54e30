use std::collections::BTreeSet;

use super::{Column, Table};

pub const SQUARE_NAMES: [&str; 9] = [
    "top-left-square",
    "top-middle-square",
    "top-right-square",
    "middle-left-square",
    "middle-middle-square",
    "middle-right-square",
    "bottom-left-square",
    "bottom-middle-square",
    "bottom-right-square",
];

pub const TICTACTOE_DESCRIPTION: &str = "Tic-Tac-Toe endgame boards.\n\
Each row is the final position of a game where x moved first. Every square holds \
x, o or b (blank). Class is positive when x completed three in a row \
(horizontally, vertically or diagonally) and negative otherwise.";

pub(crate) const LINES: [[usize; 3]; 8] =
    [[0, 1, 2], [3, 4, 5], [6, 7, 8], [0, 3, 6], [1, 4, 7], [2, 5, 8], [0, 4, 8], [2, 4, 6]];

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Mark {
    Blank,
    O,
    X,
}

fn wins(board: &[Mark; 9], m: Mark) -> bool {
    LINES.iter().any(|l| l.iter().all(|&i| board[i] == m))
}

fn play(board: &mut [Mark; 9], to_move: Mark, out: &mut BTreeSet<[Mark; 9]>) {
    if wins(board, Mark::X) || wins(board, Mark::O) || board.iter().all(|&m| m != Mark::Blank) {
        out.insert(*board);
        return;
    }
    let next = if to_move == Mark::X { Mark::O } else { Mark::X };
    for i in 0..9 {
        if board[i] == Mark::Blank {
            board[i] = to_move;
            play(board, next, out);
            board[i] = Mark::Blank;
        }
    }
}

/// Every distinct board at which a game (x first) ends, with 9 category
/// columns over {x, o, b} and a `Class` target (positive = x won).
pub fn gen_tictactoe() -> Table {
    let mut boards = BTreeSet::new();
    play(&mut [Mark::Blank; 9], Mark::X, &mut boards);

    let mut cells: Vec<Vec<Option<&str>>> = (0..9).map(|_| Vec::with_capacity(boards.len())).collect();
    let mut class = Vec::with_capacity(boards.len());
    for b in &boards {
        for (col, m) in cells.iter_mut().zip(b) {
            col.push(Some(match m {
                Mark::X => "x",
                Mark::O => "o",
                Mark::Blank => "b",
            }));
        }
        class.push(Some(if wins(b, Mark::X) { "positive" } else { "negative" }));
    }
    let mut columns: Vec<Column> = SQUARE_NAMES.iter().zip(&cells).map(|(n, c)| Column::category(*n, c)).collect();
    columns.push(Column::category("Class", &class));
    Table::new(columns, "Class").expect("generated table is well formed")
}
