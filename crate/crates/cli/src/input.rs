//! Loading signals and images and assembling problem instances.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use circlereg::io::{
    angles_to_observations, read_constraints, read_edge_list, read_phase_image, read_signal,
    read_weights, write_phase_image, write_signal, ImageFormat, PhaseImage, FLOAT_IMAGE_MAGIC,
};
use circlereg::{build_chain, build_grid, Graph, NodeWeight, ProblemInstance};
use clap::Args;
use num_complex::Complex64;

/// Flags shared by every command that builds an instance.
#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Signal text file (chain) or phase image (grid).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Uniform smoothing weight on every edge.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Edge list `n n' lambda`; replaces the chain and --lambda. Signal input only.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Uniform data weight on observed nodes.
    #[arg(long, default_value_t = 1.0)]
    pub node_weight: f64,
    /// Per-node data weights, one per line, `inf` for hard constraints; replaces --node-weight.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

/// Where the samples came from, so results can be written back alike.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Signal,
    Image { height: usize, width: usize },
}

pub struct Loaded {
    pub angles: Vec<f64>,
    pub shape: Shape,
    pub graph: Graph,
    /// Per-edge smoothing weights.
    pub lambda: Vec<f64>,
    /// Whether `lambda` came from an edge-list file.
    pub lambda_from_file: bool,
}

fn is_image(path: &Path) -> Result<bool> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let got = f.read(&mut head)?;
    Ok((got >= 2 && &head[..2] == b"P5") || (got == 8 && &head == FLOAT_IMAGE_MAGIC))
}

pub fn load(args: &InstanceArgs) -> Result<Loaded> {
    if is_image(&args.input)? {
        if args.edges.is_some() {
            bail!(circlereg::Error::InvalidInput(
                "--edges needs a signal text input".into()
            ));
        }
        let img = read_phase_image(&args.input)?;
        let graph = build_grid(img.height, img.width)?;
        let lambda = vec![args.lambda; graph.edge_count()];
        return Ok(Loaded {
            shape: Shape::Image {
                height: img.height,
                width: img.width,
            },
            angles: img.angles,
            graph,
            lambda,
            lambda_from_file: false,
        });
    }
    let angles = read_signal(&args.input)?;
    let (graph, lambda, lambda_from_file) = match &args.edges {
        Some(path) => {
            let list = read_edge_list(path)?;
            let graph = Graph::from_edges(angles.len(), &list.edges)?;
            // the graph stores edges canonically; look weights up by endpoints
            let by_edge: HashMap<(usize, usize), f64> = list
                .edges
                .iter()
                .zip(&list.lambda)
                .map(|(&(a, b), &l)| ((a.min(b), a.max(b)), l))
                .collect();
            let lambda = graph.edges().iter().map(|e| by_edge[&(e.a, e.b)]).collect();
            (graph, lambda, true)
        }
        None => {
            let graph = build_chain(angles.len())?;
            let lambda = vec![args.lambda; graph.edge_count()];
            (graph, lambda, false)
        }
    };
    Ok(Loaded {
        angles,
        shape: Shape::Signal,
        graph,
        lambda,
        lambda_from_file,
    })
}

fn to_weight(v: f64) -> NodeWeight {
    if v == f64::INFINITY {
        NodeWeight::Hard
    } else {
        NodeWeight::Finite(v)
    }
}

/// Data weights for observed nodes: the weights file if given, else the
/// uniform flag. Missing samples always get zero weight.
pub fn data_weights(args: &InstanceArgs, observed: &[bool]) -> Result<Vec<NodeWeight>> {
    let base: Vec<f64> = match &args.weights {
        Some(path) => {
            let w = read_weights(path)?;
            if w.len() != observed.len() {
                bail!(circlereg::Error::DimensionMismatch {
                    what: "weights",
                    expected: observed.len(),
                    got: w.len(),
                });
            }
            w
        }
        None => vec![args.node_weight; observed.len()],
    };
    base.iter()
        .zip(observed)
        .enumerate()
        .map(|(n, (&w, &obs))| {
            if obs {
                Ok(to_weight(w))
            } else if w == f64::INFINITY {
                bail!(circlereg::Error::InvalidInput(format!(
                    "node {n} is missing but has an infinite weight"
                )))
            } else {
                Ok(NodeWeight::Finite(0.0))
            }
        })
        .collect()
}

pub fn denoise_instance(args: &InstanceArgs, loaded: &Loaded) -> Result<ProblemInstance> {
    let (y, observed) = angles_to_observations(&loaded.angles);
    let w = data_weights(args, &observed)?;
    Ok(ProblemInstance::new(
        loaded.graph.clone(),
        y,
        w,
        loaded.lambda.clone(),
    )?)
}

/// Interpolation instance. Without a constraint file every observed sample
/// is pinned and missing samples are free. With one, observed samples are
/// soft data and the listed nodes are pinned.
pub fn interpolation_instance(
    args: &InstanceArgs,
    loaded: &Loaded,
    constraints: Option<&Path>,
) -> Result<ProblemInstance> {
    let (mut y, observed) = angles_to_observations(&loaded.angles);
    let mut w = match constraints {
        None => {
            if observed.iter().all(|&o| o) {
                bail!(circlereg::Error::InvalidInput(
                    "no missing samples to interpolate".into()
                ));
            }
            observed
                .iter()
                .map(|&o| {
                    if o {
                        NodeWeight::Hard
                    } else {
                        NodeWeight::Finite(0.0)
                    }
                })
                .collect()
        }
        Some(_) => data_weights(args, &observed)?,
    };
    if let Some(path) = constraints {
        for (n, angle) in read_constraints(path)? {
            if n >= y.len() {
                bail!(circlereg::Error::NodeOutOfRange {
                    node: n,
                    node_count: y.len(),
                });
            }
            y[n] = Complex64::from_polar(1.0, angle);
            w[n] = NodeWeight::Hard;
        }
    }
    Ok(ProblemInstance::new(
        loaded.graph.clone(),
        y,
        w,
        loaded.lambda.clone(),
    )?)
}

/// Writes angles in the same layout as the input.
pub fn write_like(path: &Path, shape: Shape, angles: Vec<f64>) -> Result<()> {
    match shape {
        Shape::Signal => write_signal(path, &angles)?,
        Shape::Image { height, width } => {
            let img = PhaseImage::new(height, width, angles)?;
            write_phase_image(path, &img, ImageFormat::from_path(path))?;
        }
    }
    Ok(())
}
