//! Built-in procedurally defined maps.
//!
//! Walls are 0.2 m thick rectangles; doors are gaps of at least 1.6 m so a
//! robot and a pedestrian can pass.

use super::{Polygon, WorldMap};

pub const BUILTIN_MAPS: &[&str] = &["empty", "training", "building_1", "building_2", "building_3"];

const WALL: f64 = 0.2;

/// Returns a built-in map by name. `empty_<w>x<h>` yields an empty map of that size.
pub fn builtin(name: &str) -> Option<WorldMap> {
    let map = match name {
        "empty" => {
            let mut m = WorldMap::empty(20.0, 20.0);
            m.name = "empty".into();
            m
        }
        "training" => training(),
        "building_1" => building_1(),
        "building_2" => building_2(),
        "building_3" => building_3(),
        other => {
            let dims = other.strip_prefix("empty_")?;
            let (w, h) = dims.split_once('x')?;
            let (w, h): (f64, f64) = (w.parse().ok()?, h.parse().ok()?);
            if !(w > 0.0 && h > 0.0) {
                return None;
            }
            WorldMap::empty(w, h)
        }
    };
    Some(map)
}

fn finish(name: &str, width: f64, height: f64, obstacles: Vec<Polygon>) -> WorldMap {
    WorldMap::new(name, width, height, obstacles, None).expect("built-in map is valid")
}

/// Horizontal wall at `y` spanning `x0..x1`, with `(center, width)` door gaps.
fn hwall(out: &mut Vec<Polygon>, y: f64, x0: f64, x1: f64, doors: &[(f64, f64)]) {
    for (a, b) in split(x0, x1, doors) {
        out.push(Polygon::rect(a, y - WALL / 2.0, b, y + WALL / 2.0));
    }
}

fn vwall(out: &mut Vec<Polygon>, x: f64, y0: f64, y1: f64, doors: &[(f64, f64)]) {
    for (a, b) in split(y0, y1, doors) {
        out.push(Polygon::rect(x - WALL / 2.0, a, x + WALL / 2.0, b));
    }
}

fn split(start: f64, end: f64, doors: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pieces = Vec::new();
    let mut cursor = start;
    let mut sorted = doors.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (center, width) in sorted {
        let (lo, hi) = (center - width / 2.0, center + width / 2.0);
        if lo > cursor {
            pieces.push((cursor, lo));
        }
        cursor = cursor.max(hi);
    }
    if end > cursor {
        pieces.push((cursor, end));
    }
    pieces
}

fn boxes(out: &mut Vec<Polygon>, list: &[[f64; 4]]) {
    out.extend(list.iter().map(|r| Polygon::rect(r[0], r[1], r[2], r[3])));
}

/// 24×20 m map with scattered static clutter, used for training.
fn training() -> WorldMap {
    let mut obs = Vec::new();
    boxes(
        &mut obs,
        &[
            [3.0, 3.0, 5.0, 4.0],
            [9.0, 2.0, 10.0, 6.0],
            [15.0, 3.0, 18.0, 4.5],
            [20.0, 7.0, 21.0, 10.0],
            [4.0, 9.0, 7.0, 10.0],
            [11.0, 9.0, 13.0, 11.0],
            [16.0, 12.0, 17.0, 15.0],
            [2.0, 14.0, 3.5, 17.0],
            [7.0, 15.0, 10.0, 16.0],
            [12.5, 16.5, 14.0, 18.0],
            [19.0, 16.0, 22.0, 17.0],
        ],
    );
    vwall(&mut obs, 8.0, 6.0, 12.0, &[]);
    hwall(&mut obs, 13.0, 18.0, 24.0, &[]);
    finish("training", 24.0, 20.0, obs)
}

/// 40×30 m office: a central 6 m corridor with rooms on both sides.
fn building_1() -> WorldMap {
    let mut obs = Vec::new();
    let doors = [(5.0, 1.6), (15.0, 1.6), (25.0, 1.6), (35.0, 1.6)];
    hwall(&mut obs, 12.0, 0.0, 40.0, &doors);
    hwall(&mut obs, 18.0, 0.0, 40.0, &doors);
    vwall(&mut obs, 10.0, 0.0, 12.0, &[(6.0, 1.6)]);
    vwall(&mut obs, 20.0, 0.0, 12.0, &[]);
    vwall(&mut obs, 30.0, 0.0, 12.0, &[(6.0, 1.6)]);
    vwall(&mut obs, 10.0, 18.0, 30.0, &[(24.0, 1.6)]);
    vwall(&mut obs, 20.0, 18.0, 30.0, &[(24.0, 1.6)]);
    vwall(&mut obs, 30.0, 18.0, 30.0, &[]);
    boxes(
        &mut obs,
        &[
            // corridor pillars
            [12.0, 14.7, 12.6, 15.3],
            [27.0, 14.7, 27.6, 15.3],
            // desks and cabinets
            [2.0, 2.0, 4.5, 3.2],
            [6.5, 7.5, 8.5, 9.0],
            [13.0, 3.0, 14.2, 6.0],
            [16.5, 8.0, 18.5, 9.2],
            [23.0, 2.0, 27.0, 3.0],
            [33.0, 5.0, 34.2, 8.5],
            [37.0, 1.0, 39.0, 2.5],
            [2.5, 21.0, 4.0, 25.0],
            [6.0, 27.0, 9.0, 28.2],
            [13.0, 22.0, 16.0, 23.2],
            [17.0, 26.0, 18.5, 28.5],
            [23.5, 20.5, 24.7, 23.5],
            [26.0, 26.5, 28.5, 27.7],
            [33.0, 21.0, 37.0, 22.2],
            [36.0, 25.5, 37.2, 28.5],
        ],
    );
    finish("building_1", 40.0, 30.0, obs)
}

/// 60×47 m floor: two corridors, an atrium with pillars and three room rows.
fn building_2() -> WorldMap {
    let mut obs = Vec::new();
    let doors = [(6.0, 1.8), (18.0, 1.8), (30.0, 1.8), (42.0, 1.8), (54.0, 1.8)];
    hwall(&mut obs, 15.0, 0.0, 60.0, &doors);
    hwall(&mut obs, 19.0, 0.0, 60.0, &[(10.0, 3.0), (30.0, 3.0), (50.0, 3.0)]);
    hwall(&mut obs, 28.0, 0.0, 60.0, &[(10.0, 3.0), (30.0, 3.0), (50.0, 3.0)]);
    hwall(&mut obs, 32.0, 0.0, 60.0, &doors);
    for (i, x) in [12.0, 24.0, 36.0, 48.0].into_iter().enumerate() {
        let lower_door: &[(f64, f64)] = if i % 2 == 0 { &[(7.5, 1.8)] } else { &[] };
        let upper_door: &[(f64, f64)] = if i % 2 == 1 { &[(39.5, 1.8)] } else { &[] };
        vwall(&mut obs, x, 0.0, 15.0, lower_door);
        vwall(&mut obs, x, 32.0, 47.0, upper_door);
    }
    // atrium pillars
    for k in 0..6 {
        let x = 5.0 + 10.0 * k as f64;
        obs.push(Polygon::rect(x - 0.4, 23.1, x + 0.4, 23.9));
    }
    // one desk cluster per room
    for k in 0..5 {
        let x0 = 12.0 * k as f64;
        boxes(
            &mut obs,
            &[
                [x0 + 3.0, 4.0, x0 + 6.0, 5.2],
                [x0 + 7.5, 9.0, x0 + 8.7, 12.0],
                [x0 + 2.5, 37.0, x0 + 3.7, 40.0],
                [x0 + 6.0, 42.0, x0 + 9.5, 43.2],
            ],
        );
    }
    finish("building_2", 60.0, 47.0, obs)
}

/// 30×30 m hall with a pillar grid and two partitions.
fn building_3() -> WorldMap {
    let mut obs = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let (x, y) = (4.5 + 7.0 * i as f64, 4.5 + 7.0 * j as f64);
            obs.push(Polygon::rect(x - 0.5, y - 0.5, x + 0.5, y + 0.5));
        }
    }
    vwall(&mut obs, 15.0, 0.0, 30.0, &[(8.0, 2.0), (22.0, 2.0)]);
    hwall(&mut obs, 15.0, 0.0, 10.0, &[(5.0, 2.0)]);
    hwall(&mut obs, 15.0, 20.0, 30.0, &[(25.0, 2.0)]);
    boxes(
        &mut obs,
        &[
            [7.0, 20.0, 9.0, 21.0],
            [21.0, 7.0, 22.0, 10.0],
            [24.0, 19.5, 27.0, 20.5],
            [2.0, 26.0, 3.0, 28.0],
        ],
    );
    finish("building_3", 30.0, 30.0, obs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_load() {
        for name in BUILTIN_MAPS {
            let map = builtin(name).unwrap();
            assert_eq!(&map.name.as_str(), name);
        }
        let m = builtin("empty_40x40").unwrap();
        assert_eq!((m.width, m.height), (40.0, 40.0));
        assert!(builtin("nowhere").is_none());
        assert!(builtin("empty_0x5").is_none());
    }

    #[test]
    fn doors_split_walls() {
        assert_eq!(split(0.0, 10.0, &[(5.0, 2.0)]), vec![(0.0, 4.0), (6.0, 10.0)]);
        assert_eq!(split(0.0, 10.0, &[]), vec![(0.0, 10.0)]);
    }
}
