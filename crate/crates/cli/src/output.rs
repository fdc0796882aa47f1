//! Output directory bookkeeping and CSV/JSON writers.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use catconv::{BoundaryField, CylinderField, Discretization};
use serde::Serialize;

/// Tracks everything written under the output directory so a failed run
/// can remove its partial results.
pub struct OutputDir {
    root: PathBuf,
    created_root: bool,
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        let created_root = !root.exists();
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            created_root,
            files: Vec::new(),
            dirs: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    pub fn subdir(&mut self, name: &str) -> std::io::Result<PathBuf> {
        let p = self.root.join(name);
        if !p.exists() {
            fs::create_dir_all(&p)?;
            self.dirs.push(p.clone());
        }
        Ok(p)
    }

    fn track(&mut self, path: PathBuf) -> std::io::Result<BufWriter<fs::File>> {
        let f = fs::File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    pub fn write_text(&mut self, path: PathBuf, text: &str) -> std::io::Result<()> {
        let mut w = self.track(path)?;
        w.write_all(text.as_bytes())?;
        w.flush()
    }

    pub fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> std::io::Result<()> {
        let mut w = self.track(path)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()
    }

    /// One `u_s_<i>.csv` and one `u_f_<i>.csv` per species in `dir`.
    pub fn write_fields(
        &mut self,
        dir: &Path,
        u_s: &BoundaryField,
        u_f: &CylinderField,
        disc: &Discretization,
    ) -> std::io::Result<()> {
        for i in 0..u_s.n_species() {
            let mut w = self.track(dir.join(format!("u_s_{}.csv", i + 1)))?;
            write_wall_csv(&mut w, u_s, i, disc)?;
            w.flush()?;
            let mut w = self.track(dir.join(format!("u_f_{}.csv", i + 1)))?;
            write_cylinder_csv(&mut w, u_f, i, disc)?;
            w.flush()?;
        }
        Ok(())
    }

    /// Removes every file and directory this run created.
    pub fn discard(self) {
        for f in self.files.iter().rev() {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
        if self.created_root {
            let _ = fs::remove_dir(&self.root);
        }
    }
}

const HEADER: &str = "r_or_z,z,t,value\n";

/// Wall rows carry `r_or_z = 1`, the wall radius.
pub fn write_wall_csv(w: &mut impl Write, u: &BoundaryField, species: usize, disc: &Discretization) -> std::io::Result<()> {
    w.write_all(HEADER.as_bytes())?;
    for (k, z) in disc.axial_nodes.iter().enumerate() {
        for (n, t) in disc.time_nodes.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", 1.0, z, t, u.values[(species, k, n)])?;
        }
    }
    Ok(())
}

pub fn write_cylinder_csv(
    w: &mut impl Write,
    u: &CylinderField,
    species: usize,
    disc: &Discretization,
) -> std::io::Result<()> {
    w.write_all(HEADER.as_bytes())?;
    for (j, r) in disc.radial_nodes.iter().enumerate() {
        for (k, z) in disc.axial_nodes.iter().enumerate() {
            for (n, t) in disc.time_nodes.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", r, z, t, u.values[(species, j, k, n)])?;
            }
        }
    }
    Ok(())
}
