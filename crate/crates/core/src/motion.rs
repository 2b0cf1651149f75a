//! Core motion data types, skeleton topology, and Motion-JSON file I/O.
//!
//! A motion is a `T x J x 3` array of joint positions in millimeters plus a
//! skeleton (parent links forming a tree) and a frame rate. Positions are
//! stored flat in node order `(t * J + j) * 3 + c`, which is also the row
//! order used by the motion-graph Laplacian.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skeleton topology: parent links forming a tree rooted at `root_index`.
///
/// Joint ordering is authoritative: index `j` in position arrays equals the
/// position in `parents` (and `joint_names` when present).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    parents: Vec<Option<usize>>,
    joint_names: Option<Vec<String>>,
    root_index: usize,
}

impl Skeleton {
    /// Builds a skeleton, validating that `parents` encodes a tree with
    /// exactly one root at `root_index` and no cycles.
    pub fn new(
        parents: Vec<Option<usize>>,
        joint_names: Option<Vec<String>>,
        root_index: usize,
    ) -> Result<Self> {
        let joints = parents.len();
        if joints == 0 {
            return Err(Error::InvalidMotion {
                field: "parents".into(),
                reason: "must contain at least one joint".into(),
            });
        }
        if let Some(names) = &joint_names {
            if names.len() != joints {
                return Err(Error::InvalidMotion {
                    field: "joint_names".into(),
                    reason: format!("has {} entries, expected {}", names.len(), joints),
                });
            }
        }
        if root_index >= joints {
            return Err(Error::InvalidMotion {
                field: "root_index".into(),
                reason: format!("{root_index} out of range for {joints} joints"),
            });
        }
        for (j, parent) in parents.iter().enumerate() {
            if let Some(p) = parent {
                if *p >= joints {
                    return Err(Error::InvalidMotion {
                        field: "parents".into(),
                        reason: format!("parents[{j}] = {p} out of range for {joints} joints"),
                    });
                }
            }
        }
        // Following parents from any joint must reach a root in < J steps.
        for start in 0..joints {
            let mut j = start;
            let mut steps = 0usize;
            while let Some(p) = parents[j] {
                j = p;
                steps += 1;
                if steps >= joints {
                    return Err(Error::InvalidMotion {
                        field: "parents".into(),
                        reason: "cyclic skeleton".into(),
                    });
                }
            }
        }
        let roots = parents.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::InvalidMotion {
                field: "parents".into(),
                reason: format!("must contain exactly one null (root) entry, found {roots}"),
            });
        }
        if parents[root_index].is_some() {
            return Err(Error::InvalidMotion {
                field: "root_index".into(),
                reason: format!("{root_index} does not point at the null parent entry"),
            });
        }
        Ok(Self {
            parents,
            joint_names,
            root_index,
        })
    }

    /// A simple kinematic chain `root <- 1 <- 2 <- ... <- joints-1`.
    pub fn chain(joints: usize) -> Result<Self> {
        let parents = (0..joints)
            .map(|j| if j == 0 { None } else { Some(j - 1) })
            .collect();
        Self::new(parents, None, 0)
    }

    /// A 17-joint humanoid (hip-rooted legs, spine, head, and arms), the
    /// topology commonly used for Human3.6M-style evaluation.
    pub fn humanoid17() -> Self {
        let parents = vec![
            None,
            Some(0),
            Some(1),
            Some(2),
            Some(0),
            Some(4),
            Some(5),
            Some(0),
            Some(7),
            Some(8),
            Some(9),
            Some(8),
            Some(11),
            Some(12),
            Some(8),
            Some(14),
            Some(15),
        ];
        let names = [
            "hip",
            "right_hip",
            "right_knee",
            "right_ankle",
            "left_hip",
            "left_knee",
            "left_ankle",
            "spine",
            "thorax",
            "neck",
            "head",
            "left_shoulder",
            "left_elbow",
            "left_wrist",
            "right_shoulder",
            "right_elbow",
            "right_wrist",
        ];
        Self::new(
            parents,
            Some(names.iter().map(|s| s.to_string()).collect()),
            0,
        )
        .expect("humanoid17 topology is a valid tree")
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn joint_names(&self) -> Option<&[String]> {
        self.joint_names.as_deref()
    }

    pub fn root_index(&self) -> usize {
        self.root_index
    }
}

/// A 3D motion: `T` frames of `J` joint positions in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    skeleton: Skeleton,
    fps: f64,
    frames: usize,
    /// Flat positions, layout `(t * J + j) * 3 + c`.
    positions: Vec<f64>,
}

impl MotionSequence {
    /// Builds a sequence from flat positions in `(t * J + j) * 3 + c` layout.
    pub fn new(skeleton: Skeleton, fps: f64, frames: usize, positions: Vec<f64>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidMotion {
                field: "fps".into(),
                reason: format!("must be positive and finite, got {fps}"),
            });
        }
        if frames == 0 {
            return Err(Error::InvalidMotion {
                field: "frames".into(),
                reason: "must contain at least one frame".into(),
            });
        }
        let expected = frames * skeleton.joint_count() * 3;
        if positions.len() != expected {
            return Err(Error::InvalidMotion {
                field: "frames".into(),
                reason: format!(
                    "flat position array has {} entries, expected {expected}",
                    positions.len()
                ),
            });
        }
        if let Some(idx) = positions.iter().position(|v| !v.is_finite()) {
            let joints = skeleton.joint_count();
            let node = idx / 3;
            return Err(Error::InvalidMotion {
                field: "frames".into(),
                reason: format!(
                    "frames[{}][{}] contains a non-finite value",
                    node / joints,
                    node % joints
                ),
            });
        }
        Ok(Self {
            skeleton,
            fps,
            frames,
            positions,
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Number of frames `T`.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Number of joints `J`.
    pub fn joints(&self) -> usize {
        self.skeleton.joint_count()
    }

    /// Flat positions in `(t * J + j) * 3 + c` layout, i.e. node-major row
    /// order for the motion-graph Laplacian.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Position of joint `j` at frame `t`.
    pub fn pos(&self, t: usize, j: usize) -> [f64; 3] {
        let base = (t * self.joints() + j) * 3;
        [
            self.positions[base],
            self.positions[base + 1],
            self.positions[base + 2],
        ]
    }

    /// Returns a copy with `delta` added to every joint of every frame.
    pub fn translated(&self, delta: [f64; 3]) -> Self {
        let mut positions = self.positions.clone();
        for chunk in positions.chunks_exact_mut(3) {
            chunk[0] += delta[0];
            chunk[1] += delta[1];
            chunk[2] += delta[2];
        }
        Self {
            skeleton: self.skeleton.clone(),
            fps: self.fps,
            frames: self.frames,
            positions,
        }
    }

    /// Checks that `other` has the same frame and joint counts.
    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.frames != other.frames || self.joints() != other.joints() {
            return Err(Error::ShapeMismatch(format!(
                "sequences have shapes {}x{} and {}x{}",
                self.frames,
                self.joints(),
                other.frames,
                other.joints()
            )));
        }
        Ok(())
    }
}

/// A 2D joint-location sequence (network input space).
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence2D {
    skeleton: Skeleton,
    fps: f64,
    frames: usize,
    /// Flat positions, layout `(t * J + j) * 2 + c`.
    positions: Vec<f64>,
}

impl MotionSequence2D {
    pub fn new(skeleton: Skeleton, fps: f64, frames: usize, positions: Vec<f64>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidMotion {
                field: "fps".into(),
                reason: format!("must be positive and finite, got {fps}"),
            });
        }
        if frames == 0 {
            return Err(Error::InvalidMotion {
                field: "frames2d".into(),
                reason: "must contain at least one frame".into(),
            });
        }
        let expected = frames * skeleton.joint_count() * 2;
        if positions.len() != expected {
            return Err(Error::InvalidMotion {
                field: "frames2d".into(),
                reason: format!(
                    "flat position array has {} entries, expected {expected}",
                    positions.len()
                ),
            });
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMotion {
                field: "frames2d".into(),
                reason: "contains a non-finite value".into(),
            });
        }
        Ok(Self {
            skeleton,
            fps,
            frames,
            positions,
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn joints(&self) -> usize {
        self.skeleton.joint_count()
    }

    /// Flat positions in `(t * J + j) * 2 + c` layout.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn pos(&self, t: usize, j: usize) -> [f64; 2] {
        let base = (t * self.joints() + j) * 2;
        [self.positions[base], self.positions[base + 1]]
    }
}

/// On-disk Motion-JSON schema. `frames` holds 3D data, `frames2d` 2D data;
/// a file carries one or the other.
#[derive(Serialize, Deserialize)]
struct MotionFile {
    fps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    joint_names: Option<Vec<String>>,
    parents: Vec<Option<i64>>,
    root_index: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    frames: Option<Vec<Vec<[f64; 3]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frames2d: Option<Vec<Vec<[f64; 2]>>>,
}

fn skeleton_from_file(file: &MotionFile) -> Result<Skeleton> {
    let mut parents = Vec::with_capacity(file.parents.len());
    for (j, p) in file.parents.iter().enumerate() {
        match p {
            None => parents.push(None),
            Some(v) if *v < 0 => {
                return Err(Error::InvalidMotion {
                    field: "parents".into(),
                    reason: format!("parents[{j}] = {v} is negative"),
                });
            }
            Some(v) => parents.push(Some(*v as usize)),
        }
    }
    if file.root_index < 0 {
        return Err(Error::InvalidMotion {
            field: "root_index".into(),
            reason: format!("{} is negative", file.root_index),
        });
    }
    Skeleton::new(parents, file.joint_names.clone(), file.root_index as usize)
}

fn skeleton_to_file_fields(skeleton: &Skeleton) -> (Option<Vec<String>>, Vec<Option<i64>>, i64) {
    let parents = skeleton
        .parents()
        .iter()
        .map(|p| p.map(|v| v as i64))
        .collect();
    (
        skeleton.joint_names().map(|n| n.to_vec()),
        parents,
        skeleton.root_index() as i64,
    )
}

/// Loads a 3D Motion-JSON file.
pub fn load_motion(path: impl AsRef<Path>) -> Result<MotionSequence> {
    let text = std::fs::read_to_string(path)?;
    parse_motion(&text)
}

/// Parses 3D Motion-JSON from a string.
pub fn parse_motion(text: &str) -> Result<MotionSequence> {
    let file: MotionFile = serde_json::from_str(text)?;
    let skeleton = skeleton_from_file(&file)?;
    let frames = file.frames.as_ref().ok_or_else(|| Error::InvalidMotion {
        field: "frames".into(),
        reason: "missing (file may be a 2D motion; expected `frames`)".into(),
    })?;
    if frames.is_empty() {
        return Err(Error::InvalidMotion {
            field: "frames".into(),
            reason: "must contain at least one frame".into(),
        });
    }
    let joints = skeleton.joint_count();
    let mut positions = Vec::with_capacity(frames.len() * joints * 3);
    for (t, frame) in frames.iter().enumerate() {
        if frame.len() != joints {
            return Err(Error::InvalidMotion {
                field: "frames".into(),
                reason: format!("frames[{t}] has {} joints, expected {joints}", frame.len()),
            });
        }
        for p in frame {
            positions.extend_from_slice(p);
        }
    }
    MotionSequence::new(skeleton, file.fps, frames.len(), positions)
}

/// Serializes a sequence to Motion-JSON text. Numbers round-trip exactly.
pub fn motion_to_json(seq: &MotionSequence) -> String {
    let (joint_names, parents, root_index) = skeleton_to_file_fields(seq.skeleton());
    let frames = (0..seq.frames())
        .map(|t| (0..seq.joints()).map(|j| seq.pos(t, j)).collect())
        .collect();
    let file = MotionFile {
        fps: seq.fps(),
        joint_names,
        parents,
        root_index,
        frames: Some(frames),
        frames2d: None,
    };
    serde_json::to_string(&file).expect("motion serialization cannot fail")
}

/// Saves a 3D motion as Motion-JSON.
pub fn save_motion(seq: &MotionSequence, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, motion_to_json(seq))?;
    Ok(())
}

/// Loads a 2D Motion-JSON file (the `frames2d` variant).
pub fn load_motion2d(path: impl AsRef<Path>) -> Result<MotionSequence2D> {
    let text = std::fs::read_to_string(path)?;
    let file: MotionFile = serde_json::from_str(&text)?;
    let skeleton = skeleton_from_file(&file)?;
    let frames = file.frames2d.as_ref().ok_or_else(|| Error::InvalidMotion {
        field: "frames2d".into(),
        reason: "missing (file may be a 3D motion; expected `frames2d`)".into(),
    })?;
    if frames.is_empty() {
        return Err(Error::InvalidMotion {
            field: "frames2d".into(),
            reason: "must contain at least one frame".into(),
        });
    }
    let joints = skeleton.joint_count();
    let mut positions = Vec::with_capacity(frames.len() * joints * 2);
    for (t, frame) in frames.iter().enumerate() {
        if frame.len() != joints {
            return Err(Error::InvalidMotion {
                field: "frames2d".into(),
                reason: format!("frames2d[{t}] has {} joints, expected {joints}", frame.len()),
            });
        }
        for p in frame {
            positions.extend_from_slice(p);
        }
    }
    MotionSequence2D::new(skeleton, file.fps, frames.len(), positions)
}

/// Saves a 2D motion as Motion-JSON (the `frames2d` variant).
pub fn save_motion2d(seq: &MotionSequence2D, path: impl AsRef<Path>) -> Result<()> {
    let (joint_names, parents, root_index) = skeleton_to_file_fields(seq.skeleton());
    let frames2d = (0..seq.frames())
        .map(|t| (0..seq.joints()).map(|j| seq.pos(t, j)).collect())
        .collect();
    let file = MotionFile {
        fps: seq.fps(),
        joint_names,
        parents,
        root_index,
        frames: None,
        frames2d: Some(frames2d),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

/// Subtracts the root joint position from every joint, per frame, so the
/// root sits at the origin in every output frame.
pub fn root_align(seq: &MotionSequence) -> MotionSequence {
    let joints = seq.joints();
    let root = seq.skeleton().root_index();
    let mut positions = seq.positions().to_vec();
    for t in 0..seq.frames() {
        let root_pos = seq.pos(t, root);
        for j in 0..joints {
            let base = (t * joints + j) * 3;
            positions[base] -= root_pos[0];
            positions[base + 1] -= root_pos[1];
            positions[base + 2] -= root_pos[2];
        }
    }
    MotionSequence {
        skeleton: seq.skeleton().clone(),
        fps: seq.fps(),
        frames: seq.frames(),
        positions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> MotionSequence {
        let skeleton = Skeleton::chain(2).unwrap();
        // Node order (t*J + j): n0..n3 as used by the graph examples.
        let positions = vec![
            0.0, 0.0, 0.0, // t0 j0
            1.0, 0.0, 0.0, // t0 j1
            0.0, 0.0, 1.0, // t1 j0
            1.0, 0.0, 1.0, // t1 j1
        ];
        MotionSequence::new(skeleton, 50.0, 2, positions).unwrap()
    }

    #[test]
    fn load_round_trips_declared_content() {
        let json = r#"{
            "fps": 50.0,
            "parents": [null, 0],
            "root_index": 0,
            "frames": [[[0.0,0.0,0.0],[1.0,0.0,0.0]],[[0.0,0.0,1.0],[1.0,0.0,1.0]]]
        }"#;
        let seq = parse_motion(json).unwrap();
        assert_eq!(seq.frames(), 2);
        assert_eq!(seq.joints(), 2);
        assert_eq!(seq, two_by_two());
    }

    #[test]
    fn cyclic_parents_are_rejected() {
        let json = r#"{"fps": 30.0, "parents": [1, 0], "root_index": 0, "frames": [[[0,0,0],[1,1,1]]]}"#;
        let err = parse_motion(json).unwrap_err();
        assert!(err.to_string().contains("cyclic skeleton"), "{err}");
    }

    #[test]
    fn self_parent_is_cyclic() {
        let err = Skeleton::new(vec![None, Some(1)], None, 0).unwrap_err();
        assert!(err.to_string().contains("cyclic skeleton"), "{err}");
    }

    #[test]
    fn frame_joint_count_mismatch_names_the_frame() {
        let json =
            r#"{"fps": 30.0, "parents": [null, 0], "root_index": 0, "frames": [[[0,0,0]]]}"#;
        let err = parse_motion(json).unwrap_err();
        assert!(err.to_string().contains("frames[0]"), "{err}");
    }

    #[test]
    fn two_roots_are_rejected() {
        let err = Skeleton::new(vec![None, None], None, 0).unwrap_err();
        assert!(err.to_string().contains("exactly one null"), "{err}");
    }

    #[test]
    fn root_index_must_match_null_parent() {
        let err = Skeleton::new(vec![None, Some(0)], None, 1).unwrap_err();
        assert!(err.to_string().contains("root_index"), "{err}");
    }

    #[test]
    fn non_finite_positions_are_rejected() {
        let skeleton = Skeleton::chain(1).unwrap();
        let err = MotionSequence::new(skeleton, 30.0, 1, vec![0.0, f64::NAN, 0.0]).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn single_frame_file_round_trips() {
        let skeleton = Skeleton::chain(3).unwrap();
        let seq = MotionSequence::new(skeleton, 25.0, 1, vec![0.5; 9]).unwrap();
        let text = motion_to_json(&seq);
        assert_eq!(parse_motion(&text).unwrap(), seq);
    }

    #[test]
    fn serialization_is_byte_stable() {
        let seq = two_by_two();
        assert_eq!(motion_to_json(&seq), motion_to_json(&seq));
    }

    #[test]
    fn root_align_subtracts_root_per_frame() {
        let skeleton = Skeleton::chain(2).unwrap();
        let seq =
            MotionSequence::new(skeleton, 30.0, 1, vec![1.0, 2.0, 3.0, 2.0, 2.0, 3.0]).unwrap();
        let aligned = root_align(&seq);
        assert_eq!(aligned.pos(0, 0), [0.0, 0.0, 0.0]);
        assert_eq!(aligned.pos(0, 1), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn root_align_is_identity_when_already_rooted() {
        let seq = root_align(&two_by_two());
        assert_eq!(root_align(&seq), seq);
    }

    #[test]
    fn motion2d_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m2d.json");
        let skeleton = Skeleton::chain(2).unwrap();
        let seq =
            MotionSequence2D::new(skeleton, 50.0, 2, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
                .unwrap();
        save_motion2d(&seq, &path).unwrap();
        assert_eq!(load_motion2d(&path).unwrap(), seq);
    }

    #[test]
    fn humanoid17_is_a_valid_tree() {
        let skel = Skeleton::humanoid17();
        assert_eq!(skel.joint_count(), 17);
        assert_eq!(skel.root_index(), 0);
        assert_eq!(skel.parents().iter().filter(|p| p.is_none()).count(), 1);
    }
}
