//! Built-in scenario gallery, embedded in the binary and exportable to disk.

use crate::error::ScenarioError;
use crate::scenario::Scenario;

/// Gallery identifiers in presentation order.
pub const IDS: &[&str] = &["ex4_2", "ex4_3", "ex4_4", "ex4_5", "model_n3"];

/// Embedded scenario text for an id.
pub fn scenario_text(id: &str) -> Option<&'static str> {
    match id {
        "ex4_2" => Some(include_str!("gallery/ex4_2.scenario")),
        "ex4_3" => Some(include_str!("gallery/ex4_3.scenario")),
        "ex4_4" => Some(include_str!("gallery/ex4_4.scenario")),
        "ex4_5" => Some(include_str!("gallery/ex4_5.scenario")),
        "model_n3" => Some(include_str!("gallery/model_n3.scenario")),
        _ => None,
    }
}

/// Load and validate a gallery scenario.
pub fn load(id: &str) -> Result<Scenario, ScenarioError> {
    let text = scenario_text(id).ok_or_else(|| {
        ScenarioError::new(
            "gallery",
            0,
            format!("unknown gallery id '{id}' (known: {})", IDS.join(", ")),
        )
    })?;
    Scenario::parse(id, &format!("gallery:{id}"), text)
}

/// Write every gallery scenario into a directory; returns the paths.
pub fn export(dir: &std::path::Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for id in IDS {
        let path = dir.join(format!("{id}.scenario"));
        std::fs::write(&path, scenario_text(id).expect("known id"))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_gallery_scenarios_validate() {
        for id in IDS {
            let sc = load(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(sc.name, *id);
            assert_eq!(sc.component_texts.len(), sc.n);
        }
    }

    #[test]
    fn unknown_id_rejected() {
        assert!(load("nope").is_err());
    }

    #[test]
    fn gallery_curves_lie_on_their_surfaces() {
        for id in IDS {
            let sc = load(id).unwrap();
            let hs = sc.hypersurface();
            let manifold = sc.manifold();
            let grid = sc.settings.grid_spec();
            for x in grid.points(manifold.domain()) {
                let p = manifold.point_at(&x).unwrap();
                let r = hs.rho_at(&p).unwrap();
                assert!(
                    r.norm() < 1e-12,
                    "{id}: rho({x:?}) = {r}"
                );
            }
        }
    }
}
