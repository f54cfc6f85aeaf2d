//! Built-in shells of the Starlink and Kuiper phase-I constellations.

use crate::geom::ShellParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellPreset {
    pub name: &'static str,
    pub params: ShellParams,
}

const fn preset(
    name: &'static str,
    planes: usize,
    sats_per_plane: usize,
    altitude_km: f64,
    inclination_deg: f64,
) -> ShellPreset {
    ShellPreset {
        name,
        params: ShellParams {
            planes,
            sats_per_plane,
            altitude_km,
            inclination_deg,
        },
    }
}

pub const PRESETS: [ShellPreset; 4] = [
    preset("starlink-a", 72, 22, 550.0, 53.0),
    preset("starlink-b", 5, 75, 1275.0, 81.0),
    preset("kuiper-a", 34, 34, 630.0, 51.9),
    preset("kuiper-b", 28, 28, 590.0, 33.0),
];

pub fn find(name: &str) -> Option<&'static ShellPreset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_table() {
        let expect = [
            ("starlink-a", 72, 22, 550.0, 53.0, 1584),
            ("starlink-b", 5, 75, 1275.0, 81.0, 375),
            ("kuiper-a", 34, 34, 630.0, 51.9, 1156),
            ("kuiper-b", 28, 28, 590.0, 33.0, 784),
        ];
        for (name, n, m, h, i, nodes) in expect {
            let p = find(name).unwrap().params;
            assert_eq!((p.planes, p.sats_per_plane), (n, m));
            assert_eq!(p.altitude_km, h);
            assert_eq!(p.inclination_deg, i);
            assert_eq!(p.node_count(), nodes);
            p.validate().unwrap();
        }
        assert!(find("STARLINK-B").is_some());
        assert!(find("oneweb").is_none());
    }
}
