//! Regenerates the shipped permeability rasters under `data/`.
//!
//! cargo run -p richards-cem --example write_reference_rasters [out-dir]

use std::path::PathBuf;

use richards_cem::model::{default_data_dir, format_raster, ReferenceLayout};

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(default_data_dir);
    std::fs::create_dir_all(&dir)?;
    for layout in ReferenceLayout::ALL {
        let field = layout.field();
        let path = dir.join(layout.file_name());
        std::fs::write(&path, format_raster(field.n(), field.values()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
