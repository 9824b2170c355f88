//! Where each stage reads and writes inside the output directory.

use std::path::{Path, PathBuf};

use loadcast::rnn::Arch;

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn ingest_dir(&self, id: &str) -> PathBuf {
        self.root.join("ingest").join(id)
    }

    pub fn manifest(&self, id: &str) -> PathBuf {
        self.ingest_dir(id).join("manifest.json")
    }

    pub fn train_cv(&self, id: &str) -> PathBuf {
        self.ingest_dir(id).join("train_cv.csv")
    }

    pub fn holdout(&self, id: &str) -> PathBuf {
        self.ingest_dir(id).join("holdout.csv")
    }

    pub fn eda_dir(&self, id: &str) -> PathBuf {
        self.root.join("eda").join(id)
    }

    pub fn model_dir(&self, id: &str, arch: Arch) -> PathBuf {
        self.root.join("models").join(id).join(arch.name())
    }

    pub fn checkpoint(&self, id: &str, arch: Arch, fold: usize) -> PathBuf {
        self.model_dir(id, arch).join(format!("fold_{fold:02}.json"))
    }

    pub fn loss_log(&self, id: &str, arch: Arch, fold: usize) -> PathBuf {
        self.model_dir(id, arch).join(format!("loss_fold_{fold:02}.csv"))
    }

    pub fn records(&self, id: &str, arch: Arch) -> PathBuf {
        self.root.join("records").join(format!("{id}_{arch}.csv"))
    }

    pub fn timing(&self, id: &str, arch: Arch) -> PathBuf {
        self.root.join("timing").join(format!("{id}_{arch}.csv"))
    }

    pub fn eval_dir(&self, id: &str) -> PathBuf {
        self.root.join("eval").join(id)
    }

    pub fn metrics_csv(&self, id: &str, arch: Arch) -> PathBuf {
        self.eval_dir(id).join(format!("{arch}_holdout_metrics.csv"))
    }

    pub fn metrics_json(&self, id: &str, arch: Arch) -> PathBuf {
        self.eval_dir(id).join(format!("{arch}_holdout_metrics.json"))
    }

    pub fn nrmse_boxplot(&self, id: &str, arch: Arch) -> PathBuf {
        self.eval_dir(id).join(format!("{arch}_nrmse_boxplot.csv"))
    }

    pub fn overlay(&self, id: &str, arch: Arch) -> PathBuf {
        self.eval_dir(id).join(format!("overlay_{arch}.csv"))
    }

    pub fn compare_dir(&self) -> PathBuf {
        self.root.join("compare")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }
}
