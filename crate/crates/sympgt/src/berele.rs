//! Jeu de taquin and Berele's insertion for symplectic tableaux.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{Letter, Partition, SymplecticTableau};
use crate::error::{Error, Result};

/// A tableau with exactly one empty cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuncturedTableau {
    cells: Vec<Vec<Option<Letter>>>,
    hole: (usize, usize),
}

impl PuncturedTableau {
    /// Empties the cell `(row, col)` of `t` (zero-based).
    pub fn new(t: &SymplecticTableau, hole: (usize, usize)) -> Result<Self> {
        let mut cells: Vec<Vec<Option<Letter>>> =
            t.rows().iter().map(|r| r.iter().copied().map(Some).collect()).collect();
        match cells.get_mut(hole.0).and_then(|r| r.get_mut(hole.1)) {
            Some(c) => *c = None,
            None => return Err(Error::Domain(format!("hole {hole:?} is outside the shape {}", t.shape()))),
        }
        Ok(Self { cells, hole })
    }

    /// Builds from rows where `None` marks the single empty cell.
    pub fn from_cells(cells: Vec<Vec<Option<Letter>>>) -> Result<Self> {
        let holes: Vec<(usize, usize)> = cells
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().filter(|(_, c)| c.is_none()).map(move |(c, _)| (r, c)))
            .collect();
        if holes.len() != 1 {
            return Err(Error::Domain(format!("expected one empty cell, found {}", holes.len())));
        }
        if cells.windows(2).any(|w| w[0].len() < w[1].len()) {
            return Err(Error::Domain("rows must weakly decrease in length".into()));
        }
        Ok(Self { cells, hole: holes[0] })
    }

    pub fn hole(&self) -> (usize, usize) {
        self.hole
    }

    pub fn shape(&self) -> Partition {
        Partition::new(self.cells.iter().map(|r| r.len() as i64).collect()).expect("rows form a diagram")
    }

    fn at(&self, r: usize, c: usize) -> Option<Letter> {
        self.cells.get(r).and_then(|row| row.get(c)).copied().flatten()
    }
}

impl fmt::Display for PuncturedTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let s: Vec<String> = row.iter().map(|x| x.map_or("_".to_string(), |l| l.to_string())).collect();
            write!(f, "{}", s.join(" "))?;
        }
        Ok(())
    }
}

/// Where the empty cell moves next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slide {
    Right,
    Down,
    /// The hole is a corner and is removed.
    Stop,
}

/// The sliding rule: right if `right < below`, down if `right ≥ below`,
/// and the only neighbour when there is one.
pub fn slide_rule(right: Option<Letter>, below: Option<Letter>) -> Slide {
    match (right, below) {
        (None, None) => Slide::Stop,
        (Some(_), None) => Slide::Right,
        (None, Some(_)) => Slide::Down,
        (Some(r), Some(b)) if r < b => Slide::Right,
        (Some(_), Some(_)) => Slide::Down,
    }
}

/// Slides the hole to a corner and removes it.
pub fn jeu_de_taquin(t: PuncturedTableau) -> SymplecticTableau {
    jeu_de_taquin_traced(t).0
}

/// Same as [`jeu_de_taquin`], also returning the path of the hole.
pub fn jeu_de_taquin_traced(mut t: PuncturedTableau) -> (SymplecticTableau, Vec<(usize, usize)>) {
    let mut path = vec![t.hole];
    loop {
        let (i, j) = t.hole;
        let next = match slide_rule(t.at(i, j + 1), t.at(i + 1, j)) {
            Slide::Right => (i, j + 1),
            Slide::Down => (i + 1, j),
            Slide::Stop => break,
        };
        t.cells[i][j] = t.cells[next.0][next.1].take();
        t.hole = next;
        path.push(next);
    }
    let (i, _) = t.hole;
    t.cells[i].pop();
    let rows = t.cells.into_iter().map(|r| r.into_iter().map(|c| c.expect("single hole")).collect()).collect();
    (SymplecticTableau::from_rows(rows), path)
}

/// One row-insertion event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum InsertionEvent {
    /// `letter` placed at the end of row `row` (1-based).
    Placed { row: usize, letter: String },
    /// `letter` entered row `row`, displacing `bumped`.
    Bumped { row: usize, letter: String, bumped: String },
    /// `k` and `k̄` cancelled in row `k`; the hole then followed `path`.
    Cancelled { row: usize, path: Vec<(usize, usize)> },
}

/// Result of one insertion together with its event log.
#[derive(Clone, Debug)]
pub struct InsertionTrace {
    pub tableau: SymplecticTableau,
    pub events: Vec<InsertionEvent>,
}

/// Berele insertion `P ← letter`.
pub fn insert(p: &SymplecticTableau, letter: Letter) -> SymplecticTableau {
    insert_traced(p, letter).tableau
}

/// Berele insertion with an event log.
pub fn insert_traced(p: &SymplecticTableau, letter: Letter) -> InsertionTrace {
    let mut rows: Vec<Vec<Letter>> = p.rows().to_vec();
    let mut events = Vec::new();
    let mut x = letter;
    let mut r = 0;
    loop {
        if r == rows.len() {
            rows.push(Vec::new());
        }
        let row_index = r as u32 + 1;
        match rows[r].iter().position(|&y| y > x) {
            None => {
                rows[r].push(x);
                events.push(InsertionEvent::Placed { row: r + 1, letter: x.to_string() });
                break;
            }
            Some(pos) => {
                let y = rows[r][pos];
                if x == Letter::unbarred(row_index) && y == Letter::barred(row_index) {
                    let base = SymplecticTableau::from_rows(rows);
                    let punctured = PuncturedTableau::new(&base, (r, pos)).expect("position is inside the shape");
                    let (tableau, path) = jeu_de_taquin_traced(punctured);
                    events.push(InsertionEvent::Cancelled { row: r + 1, path });
                    return InsertionTrace { tableau, events };
                }
                rows[r][pos] = x;
                events.push(InsertionEvent::Bumped { row: r + 1, letter: x.to_string(), bumped: y.to_string() });
                x = y;
                r += 1;
            }
        }
    }
    InsertionTrace { tableau: SymplecticTableau::from_rows(rows), events }
}

/// The pair `(P, (f⁰, …, f^m))` produced by inserting a word letter by letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InsertionRecord {
    pub word: Vec<Letter>,
    pub tableau: SymplecticTableau,
    pub shapes: Vec<Partition>,
}

impl InsertionRecord {
    /// The output pair without the input word.
    pub fn output(&self) -> (SymplecticTableau, Vec<Partition>) {
        (self.tableau.clone(), self.shapes.clone())
    }
}

fn check_letters(word: &[Letter], n: u32) -> Result<()> {
    match word.iter().find(|l| l.0 == 0 || l.0 > 2 * n) {
        Some(l) => Err(Error::Domain(format!("letter {l} is outside the rank-{n} alphabet"))),
        None => Ok(()),
    }
}

/// Inserts `word` into the empty tableau, recording every intermediate shape.
pub fn process_word(word: &[Letter], n: u32) -> Result<InsertionRecord> {
    check_letters(word, n)?;
    let mut p = SymplecticTableau::empty();
    let mut shapes = vec![Partition::empty()];
    for &l in word {
        p = insert(&p, l);
        shapes.push(p.shape());
    }
    Ok(InsertionRecord { word: word.to_vec(), tableau: p, shapes })
}

/// Every intermediate tableau `P(0), …, P(m)`.
pub fn process_word_steps(word: &[Letter], n: u32) -> Result<Vec<SymplecticTableau>> {
    check_letters(word, n)?;
    let mut out = vec![SymplecticTableau::empty()];
    for &l in word {
        let next = insert(out.last().expect("nonempty"), l);
        out.push(next);
    }
    Ok(out)
}

/// All words of length exactly `len` over the rank-`n` alphabet.
pub fn all_words(n: u32, len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=2 * n).map(move |c| {
                    let mut v = w.clone();
                    v.push(Letter(c));
                    v
                })
            })
            .collect();
    }
    out
}

/// Outcome of an exhaustive injectivity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    pub n: u32,
    pub max_len: usize,
    pub words: usize,
    pub distinct_outputs: usize,
    /// Every intermediate tableau validated and every shape step was a single box.
    pub all_valid: bool,
}

impl InjectivityReport {
    pub fn injective(&self) -> bool {
        self.words == self.distinct_outputs
    }
}

fn single_box_step(a: &Partition, b: &Partition) -> bool {
    let len = a.len().max(b.len());
    let diff: i64 = a.padded(len).iter().zip(b.padded(len)).map(|(x, y)| (x - y).abs()).sum();
    diff == 1
}

/// Processes every word of length `≤ max_len` and counts distinct outputs.
pub fn injectivity_check(n: u32, max_len: usize) -> InjectivityReport {
    let words: Vec<Vec<Letter>> = (0..=max_len).flat_map(|l| all_words(n, l)).collect();
    let results: Vec<(InsertionRecord, bool)> = words
        .par_iter()
        .map(|w| {
            let steps = process_word_steps(w, n).expect("letters in range");
            let valid = steps.iter().all(|t| t.validate(n).is_ok())
                && steps.windows(2).all(|s| single_box_step(&s[0].shape(), &s[1].shape()));
            let rec = process_word(w, n).expect("letters in range");
            (rec, valid)
        })
        .collect();
    let all_valid = results.iter().all(|(_, v)| *v);
    let distinct: HashSet<(SymplecticTableau, Vec<Partition>)> = results.iter().map(|(r, _)| r.output()).collect();
    InjectivityReport { n, max_len, words: words.len(), distinct_outputs: distinct.len(), all_valid }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::parse_word;

    fn tab(rows: &[&str]) -> SymplecticTableau {
        SymplecticTableau::from_rows(rows.iter().map(|r| parse_word(r).unwrap()).collect())
    }

    #[test]
    fn slide_rule_table() {
        let (a, b) = (Letter(2), Letter(3));
        assert_eq!(slide_rule(Some(a), Some(b)), Slide::Right);
        assert_eq!(slide_rule(Some(b), Some(b)), Slide::Down);
        assert_eq!(slide_rule(Some(b), Some(a)), Slide::Down);
        assert_eq!(slide_rule(Some(a), None), Slide::Right);
        assert_eq!(slide_rule(None, Some(a)), Slide::Down);
        assert_eq!(slide_rule(None, None), Slide::Stop);
    }

    #[test]
    fn jdt_two_step_example() {
        let t = PuncturedTableau::from_cells(vec![
            vec![None, Some(Letter::unbarred(1)), Some(Letter::unbarred(2))],
            vec![Some(Letter::unbarred(2)), Some(Letter::unbarred(2))],
        ])
        .unwrap();
        let (out, path) = jeu_de_taquin_traced(t);
        assert_eq!(out, tab(&["1 2 2", "2"]));
        assert_eq!(path, vec![(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn jdt_corner_hole() {
        let t = tab(&["1 1~ 2", "2"]);
        let out = jeu_de_taquin(PuncturedTableau::new(&t, (0, 2)).unwrap());
        assert_eq!(out, tab(&["1 1~", "2"]));
    }

    #[test]
    fn insertion_example_with_cancellation() {
        let p = tab(&["1 1 2 2~", "2 2~ 3", "3 3~"]);
        p.validate(3).unwrap();
        let trace = insert_traced(&p, Letter::barred(1));
        assert_eq!(trace.tableau, tab(&["1 1 1~ 2~", "2 3", "3 3~"]));
        assert!(matches!(trace.events.last(), Some(InsertionEvent::Cancelled { row: 2, .. })));
    }

    #[test]
    fn word_example() {
        let w = parse_word("3~ 2 1~ 3~ 1 2 1").unwrap();
        let rec = process_word(&w, 3).unwrap();
        let shapes: Vec<String> = rec.shapes.iter().map(|s| s.to_string()).collect();
        assert_eq!(shapes, ["()", "(1)", "(1,1)", "(1,1,1)", "(2,1,1)", "(2,1)", "(2,2)", "(2,2,1)"]);
        assert_eq!(rec.tableau, tab(&["1 2", "2 3~", "3~"]));
    }

    #[test]
    fn trivial_cases() {
        let rec = process_word(&[], 2).unwrap();
        assert_eq!(rec.tableau, SymplecticTableau::empty());
        assert_eq!(rec.shapes, vec![Partition::empty()]);
        assert_eq!(insert(&SymplecticTableau::empty(), Letter(3)), tab(&["2"]));
        assert_eq!(insert(&tab(&["1 2"]), Letter::barred(2)), tab(&["1 2 2~"]));
        assert!(process_word(&[Letter(5)], 2).is_err());
    }

    #[test]
    fn injective_rank_two_short() {
        let rep = injectivity_check(2, 3);
        assert!(rep.all_valid);
        assert!(rep.injective());
        assert_eq!(rep.words, 1 + 4 + 16 + 64);
    }
}
