//! Discretized shortest paths through the chain of diamonds visited by a
//! word. Used only to cross-check [`super::diamond_distance`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::freegroup::{Letter, Word};

/// Longest word accepted by the oracle.
pub const ORACLE_MAX_LENGTH: usize = 12;

/// 16-point stencil: axis, diagonal and knight moves.
const STENCIL: [(i32, i32); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
];

/// Grid on the square `|x| + |y| ≤ 1` with spacing `2 / n`.
struct Grid {
    n: i32,
    side: usize,
    inside: Vec<bool>,
    /// Neighbours of each inside node as (local index, edge length).
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl Grid {
    fn new(n: i32) -> Grid {
        let side = (n + 1) as usize;
        let c = n / 2;
        let h = 2.0 / n as f64;
        let inside_at = |i: i32, j: i32| {
            (0..=n).contains(&i) && (0..=n).contains(&j) && (i - c).abs() + (j - c).abs() <= c
        };
        let mut inside = vec![false; side * side];
        let mut adjacency = vec![Vec::new(); side * side];
        for i in 0..=n {
            for j in 0..=n {
                if !inside_at(i, j) {
                    continue;
                }
                let here = i as usize * side + j as usize;
                inside[here] = true;
                for (di, dj) in STENCIL {
                    let (p, q) = (i + di, j + dj);
                    // The square is convex, so endpoints inside suffice.
                    if inside_at(p, q) {
                        let len = h * ((di * di + dj * dj) as f64).sqrt();
                        adjacency[here].push((p as u32 * side as u32 + q as u32, len));
                    }
                }
            }
        }
        Grid {
            n,
            side,
            inside,
            adjacency,
        }
    }

    fn local(&self, i: i32, j: i32) -> usize {
        let idx = i as usize * self.side + j as usize;
        debug_assert!(self.inside[idx]);
        idx
    }

    fn center(&self) -> usize {
        self.local(self.n / 2, self.n / 2)
    }

    /// Vertex through which the translate by `l` is attached.
    fn exit(&self, l: Letter) -> usize {
        let (n, c) = (self.n, self.n / 2);
        match l.index() {
            1 => self.local(n, c),
            -1 => self.local(0, c),
            2 => self.local(c, 0),
            _ => self.local(c, n),
        }
    }

    /// The vertex of the next diamond glued to [`Grid::exit`].
    fn entry(&self, l: Letter) -> usize {
        self.exit(l.inverse())
    }
}

#[derive(PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Approximates `d(q₀, w·q₀)` in the diamond complex by Dijkstra on a
/// discretized chain of the `|w| + 1` diamonds met by the geodesic.
///
/// Grid paths are genuine paths in the complex, so the result is never
/// below the true distance.
pub fn diamond_distance_oracle(w: &Word, mesh: usize) -> Result<f64> {
    let too_long = w.len_u64().is_none_or(|l| l > ORACLE_MAX_LENGTH as u64);
    if too_long {
        return Err(Error::WordTooLong {
            len: w.len().to_string(),
            max: ORACLE_MAX_LENGTH,
        });
    }
    if mesh < 4 {
        return Err(Error::MeshTooCoarse(mesh));
    }
    if w.max_generator() > 2 {
        return Err(Error::LetterOutOfRange {
            letter: w.max_generator() as i64,
            generators: 2,
        });
    }
    let letters: Vec<Letter> = w.letters().collect();
    let n = (mesh + mesh % 2) as i32;
    let grid = Grid::new(n);
    let p = grid.side * grid.side;
    let diamonds = letters.len() + 1;

    // Node (k, local) has id k·p + local; entry vertices alias the previous
    // diamond's exit vertex.
    let canonical = |k: usize, local: usize| -> usize {
        if k > 0 && local == grid.entry(letters[k - 1]) {
            (k - 1) * p + grid.exit(letters[k - 1])
        } else {
            k * p + local
        }
    };

    let source = grid.center();
    let target = (diamonds - 1) * p + grid.center();
    let mut dist = vec![f64::INFINITY; diamonds * p];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Item(0.0, source as u32));
    while let Some(Item(du, u)) = heap.pop() {
        let u = u as usize;
        if du > dist[u] {
            continue;
        }
        if u == target {
            return Ok(du);
        }
        let (k, local) = (u / p, u % p);
        let mut memberships = [(k, local), (usize::MAX, 0)];
        if k + 1 < diamonds && local == grid.exit(letters[k]) {
            memberships[1] = (k + 1, grid.entry(letters[k]));
        }
        for &(kk, loc) in memberships.iter().filter(|m| m.0 != usize::MAX) {
            for &(v, len) in &grid.adjacency[loc] {
                let id = canonical(kk, v as usize);
                let nd = du + len;
                if nd < dist[id] {
                    dist[id] = nd;
                    heap.push(Item(nd, id as u32));
                }
            }
        }
    }
    unreachable!("the chain of diamonds is connected")
}
