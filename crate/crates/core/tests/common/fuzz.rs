//! Random tables and well-typed scripts shared by the interpreter tests.

use fecraft_core::tabular::{Column, Table};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sample_table(rng: &mut ChaCha8Rng, n: usize) -> Table {
    let num = |rng: &mut ChaCha8Rng| -> Option<f64> {
        match rng.random_range(0..10) {
            0 => None,
            1 => Some(0.0),
            2 => Some(-(rng.random_range(0..50) as f64)),
            _ => Some((rng.random_range(-500..5000) as f64) / 10.0),
        }
    };
    let cats = ["C33", "C2", "Owned", "x", "o", "b", "12.5", "F/7/S"];
    let texts = ["F/356/S", "A/1/P", "G", "", "Rented", "3.25", "-4", "99 red balloons", "e5"];
    let n_col: Vec<Option<f64>> = (0..n).map(|_| num(rng)).collect();
    let m_col: Vec<Option<f64>> = (0..n).map(|_| num(rng)).collect();
    let b_col: Vec<Option<bool>> =
        (0..n).map(|_| if rng.random_bool(0.1) { None } else { Some(rng.random_bool(0.5)) }).collect();
    let c_col: Vec<Option<&str>> =
        (0..n).map(|_| if rng.random_bool(0.1) { None } else { Some(cats[rng.random_range(0..cats.len())]) }).collect();
    let t_col: Vec<Option<String>> = (0..n)
        .map(|_| if rng.random_bool(0.1) { None } else { Some(texts[rng.random_range(0..texts.len())].to_string()) })
        .collect();
    let y: Vec<Option<&str>> = (0..n).map(|i| Some(if i % 2 == 0 { "p" } else { "q" })).collect();
    Table::new(
        vec![
            Column::number("n", n_col),
            Column::number("m", m_col),
            Column::boolean("b", b_col),
            Column::category("c", &c_col),
            Column::text("t", t_col),
            Column::category("y", &y),
        ],
        "y",
    )
    .unwrap()
}

/// Random well-typed expression source.
struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    as_int_weight: u32,
}

impl Gen<'_> {
    fn lit_num(&mut self) -> String {
        match self.rng.random_range(0..4) {
            0 => "0".into(),
            1 => format!("-{}", self.rng.random_range(1..20)),
            _ => format!("{}", self.rng.random_range(0..400) as f64 / 4.0),
        }
    }

    fn num(&mut self, d: u32) -> String {
        let leaf = d == 0 || self.rng.random_bool(0.25);
        if leaf {
            return match self.rng.random_range(0..3) {
                0 => "col(\"n\")".into(),
                1 => "col(\"m\")".into(),
                _ => self.lit_num(),
            };
        }
        match self.rng.random_range(0..14 + self.as_int_weight) {
            0..=3 => {
                let op = ["+", "-", "*", "/"][self.rng.random_range(0..4)];
                format!("({} {op} {})", self.num(d - 1), self.num(d - 1))
            }
            4 => format!("-{}", self.num(d - 1)),
            5 => format!("abs({})", self.num(d - 1)),
            6 => format!("log({})", self.num(d - 1)),
            7 => format!("min2({}, {})", self.num(d - 1), self.num(d - 1)),
            8 => format!("max2({}, {})", self.num(d - 1), self.num(d - 1)),
            9 => format!("fill_missing({}, {})", self.num(d - 1), self.lit_num()),
            10 => format!("if_else({}, {}, {})", self.boolean(d - 1), self.num(d - 1), self.num(d - 1)),
            11 => format!("str_extract_int({})", self.string(d - 1)),
            12 => format!("as_number({})", self.string(d - 1)),
            13 => format!("as_number({})", self.boolean(d - 1)),
            _ => format!("as_int({})", self.num(d - 1)),
        }
    }

    fn boolean(&mut self, d: u32) -> String {
        if d == 0 || self.rng.random_bool(0.2) {
            return if self.rng.random_bool(0.7) { "col(\"b\")".into() } else { "true".into() };
        }
        match self.rng.random_range(0..9) {
            0 => {
                let op = ["==", "!=", "<", "<=", ">", ">="][self.rng.random_range(0..6)];
                format!("({} {op} {})", self.num(d - 1), self.num(d - 1))
            }
            1 => {
                let op = ["==", "!="][self.rng.random_range(0..2)];
                format!("({} {op} {})", self.string(d - 1), self.string(d - 1))
            }
            2 => format!("({} and {})", self.boolean(d - 1), self.boolean(d - 1)),
            3 => format!("({} or {})", self.boolean(d - 1), self.boolean(d - 1)),
            4 => format!("not {}", self.boolean(d - 1)),
            5 => format!("is_missing({})", self.num(d - 1)),
            6 => format!("str_contains({}, \"/\")", self.string(d - 1)),
            7 => format!("str_endswith({}, \"S\")", self.string(d - 1)),
            _ => format!("fill_missing({}, false)", self.boolean(d - 1)),
        }
    }

    fn string(&mut self, d: u32) -> String {
        if d == 0 || self.rng.random_bool(0.25) {
            return ["col(\"c\")", "col(\"t\")", "\"x\""][self.rng.random_range(0..3)].into();
        }
        match self.rng.random_range(0..7) {
            0 => format!("str_split({}, \"/\", {})", self.string(d - 1), self.rng.random_range(-3..3)),
            1 => format!("str_char({}, {})", self.string(d - 1), self.rng.random_range(-2..3)),
            2 => format!("as_category({})", self.num(d - 1)),
            3 => format!("bin({}, [-10, 0, 5.5, 100], [\"lo\", \"mid\", \"hi\"])", self.num(d - 1)),
            4 => format!("if_else({}, {}, {})", self.boolean(d - 1), self.string(d - 1), self.string(d - 1)),
            5 => format!("fill_missing({}, \"none\")", self.string(d - 1)),
            _ => format!("as_category({})", self.boolean(d - 1)),
        }
    }
}

pub fn random_script(rng: &mut ChaCha8Rng, as_int_weight: u32) -> String {
    let mut src = String::new();
    let k = rng.random_range(1..4);
    for i in 0..k {
        let d = rng.random_range(1..5);
        let mut g = Gen { rng, as_int_weight };
        let expr = match g.rng.random_range(0..3) {
            0 => g.num(d),
            1 => g.boolean(d),
            _ => g.string(d),
        };
        src.push_str(&format!("feature \"f{i}\" {{ usefulness: \"u\" expr: {expr} }}\n"));
    }
    if rng.random_bool(0.3) {
        src.push_str("drop \"m\"\n");
    }
    src
}
