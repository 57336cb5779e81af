//! Build a ruby lattice, punch two punctures with mixed boundaries, route
//! connector strings between them, and render everything to JSON and SVG.

use rubylab::geometry::*;

fn main() {
    let spec = LatticeSpec { cells_x: 6, cells_y: 5, boundary_y: BoundaryY::Open, spacing: 1.0 };
    let lat = build_ruby_lattice(&spec).unwrap();
    println!(
        "lattice: {} sites, {} triangles ({} cells)",
        lat.n_sites(),
        lat.n_triangles(),
        spec.cells_x * spec.cells_y
    );

    let punctured = apply_puncture(
        &lat,
        &[
            PunctureSpec::new(vec![[1, 2]], SegmentSplit::HalfByAngle),
            PunctureSpec::new(vec![[4, 2]], SegmentSplit::HalfByAngle),
        ],
    )
    .unwrap();
    for (i, rec) in punctured.punctures.iter().enumerate() {
        println!(
            "puncture {i}: centroid ({:.2}, {:.2}), {} e-sites (detuning scaled), {} m-sites",
            rec.centroid[0],
            rec.centroid[1],
            rec.e_sites.len(),
            rec.m_sites.len()
        );
    }

    let z = punctured
        .connector_path(
            Anchor { puncture: 0, segment: SegmentKind::M },
            Anchor { puncture: 1, segment: SegmentKind::M },
            StringKind::Z,
        )
        .unwrap();
    let x = punctured
        .connector_path(
            Anchor { puncture: 0, segment: SegmentKind::E },
            Anchor { puncture: 1, segment: SegmentKind::E },
            StringKind::XDual,
        )
        .unwrap();
    println!("Z connector cuts {} sites; X connector cuts {} triangles", z.sites.len(), x.sites.len());

    let dual = punctured.dual_path(&x).unwrap();
    println!("dual of the X connector is a Z path over {} sites", dual.sites.len());

    let json = punctured.to_json(&[("z-connector", &z), ("x-connector", &x)]);
    let dir = std::env::temp_dir();
    std::fs::write(
        dir.join("lattice_geometry.json"),
        serde_json::to_string_pretty(&json).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.join("lattice_geometry.svg"),
        punctured.to_svg(&[("z-connector", &z), ("x-connector", &x)]),
    )
    .unwrap();
    println!("wrote lattice_geometry.{{json,svg}} to {}", dir.display());
}
