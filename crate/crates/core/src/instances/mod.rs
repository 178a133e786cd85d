//! Regret and approachability instances, their loss functionals, and the
//! external / proper / improper classification.

mod classify;
mod eval;
mod maps;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::polytope::Polytope;

pub use classify::{
    classify, find_fixed_point, separating_direction, ClassKind, Classification, Witness,
};
pub(crate) use eval::check_weights;
pub use eval::{
    apploss_of_play, regret_as_approachability, regret_of_play, regret_per_generator,
    weighted_regret, PayoffAccumulator,
};
pub use maps::{AffineMapGen, BilinearGen};

/// `(P, L, Phi)` with `Phi` the convex hull of `phi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegretInstance {
    pub name: String,
    pub p: Polytope,
    pub l: Polytope,
    pub phi: Vec<AffineMapGen>,
}

/// `(P, L, U)` with `U` the convex hull of `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproachabilityInstance {
    pub name: String,
    pub p: Polytope,
    pub l: Polytope,
    pub u: Vec<BilinearGen>,
}

impl RegretInstance {
    pub fn new(
        name: impl Into<String>,
        p: Polytope,
        l: Polytope,
        phi: Vec<AffineMapGen>,
    ) -> Result<Self> {
        let inst = RegretInstance {
            name: name.into(),
            p,
            l,
            phi,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.p.ambient_dim();
        ensure_dim("loss set dimension", d, self.l.ambient_dim())?;
        if self.phi.is_empty() {
            return Err(Error::InvalidInstance("generator list is empty".into()));
        }
        for g in &self.phi {
            g.validate()?;
            ensure_dim("generator dimension", d, g.dim())?;
        }
        unique_labels(self.phi.iter().map(|g| g.label.as_str()))
    }

    pub fn dim(&self) -> usize {
        self.p.ambient_dim()
    }

    pub fn generator(&self, label: &str) -> Option<&AffineMapGen> {
        self.phi.iter().find(|g| g.label == label)
    }
}

impl ApproachabilityInstance {
    pub fn new(
        name: impl Into<String>,
        p: Polytope,
        l: Polytope,
        u: Vec<BilinearGen>,
    ) -> Result<Self> {
        let inst = ApproachabilityInstance {
            name: name.into(),
            p,
            l,
            u,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.is_empty() {
            return Err(Error::InvalidInstance("constraint list is empty".into()));
        }
        for g in &self.u {
            ensure_dim(
                "constraint action dimension",
                self.p.ambient_dim(),
                g.dim_p(),
            )?;
            ensure_dim("constraint loss dimension", self.l.ambient_dim(), g.dim_l())?;
            ensure_dim("constraint p_offset", g.dim_l(), g.p_offset.len())?;
            ensure_dim("constraint l_offset", g.dim_p(), g.l_offset.len())?;
        }
        unique_labels(self.u.iter().map(|g| g.label.as_str()))
    }

    pub fn dim_p(&self) -> usize {
        self.p.ambient_dim()
    }

    pub fn dim_l(&self) -> usize {
        self.l.ambient_dim()
    }
}

fn unique_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidInstance(format!(
                "duplicate generator label {l:?}"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Regret(RegretInstance),
    Approachability(ApproachabilityInstance),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: String,
    name: String,
    dim: usize,
    #[serde(rename = "P")]
    p: Polytope,
    #[serde(rename = "L")]
    l: Polytope,
    #[serde(rename = "Phi", default, skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<AffineMapGen>>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    u: Option<Vec<BilinearGen>>,
}

impl Instance {
    pub fn name(&self) -> &str {
        match self {
            Instance::Regret(r) => &r.name,
            Instance::Approachability(a) => &a.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Regret(_) => "regret",
            Instance::Approachability(_) => "approachability",
        }
    }

    pub fn as_regret(&self) -> Option<&RegretInstance> {
        match self {
            Instance::Regret(r) => Some(r),
            Instance::Approachability(_) => None,
        }
    }

    pub fn as_approachability(&self) -> Option<&ApproachabilityInstance> {
        match self {
            Instance::Approachability(a) => Some(a),
            Instance::Regret(_) => None,
        }
    }

    /// Regret instances are viewed through their constraint form.
    pub fn to_approachability(&self) -> ApproachabilityInstance {
        match self {
            Instance::Regret(r) => regret_as_approachability(r),
            Instance::Approachability(a) => a.clone(),
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let file = match self.clone() {
            Instance::Regret(r) => InstanceFile {
                kind: "regret".into(),
                dim: r.dim(),
                name: r.name,
                p: r.p,
                l: r.l,
                phi: Some(r.phi),
                u: None,
            },
            Instance::Approachability(a) => InstanceFile {
                kind: "approachability".into(),
                dim: a.dim_p(),
                name: a.name,
                p: a.p,
                l: a.l,
                phi: None,
                u: Some(a.u),
            },
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        ensure_dim("declared dim", file.dim, file.p.ambient_dim())?;
        match (file.kind.as_str(), file.phi, file.u) {
            ("regret", Some(phi), None) => Ok(Instance::Regret(RegretInstance::new(
                file.name, file.p, file.l, phi,
            )?)),
            ("approachability", None, Some(u)) => Ok(Instance::Approachability(
                ApproachabilityInstance::new(file.name, file.p, file.l, u)?,
            )),
            ("regret", _, _) => Err(Error::Malformed(
                "regret instance needs \"Phi\" and no \"U\"".into(),
            )),
            ("approachability", _, _) => Err(Error::Malformed(
                "approachability instance needs \"U\" and no \"Phi\"".into(),
            )),
            (k, _, _) => Err(Error::Malformed(format!("unknown instance kind {k:?}"))),
        }
    }
}

impl From<RegretInstance> for Instance {
    fn from(r: RegretInstance) -> Self {
        Instance::Regret(r)
    }
}

impl From<ApproachabilityInstance> for Instance {
    fn from(a: ApproachabilityInstance) -> Self {
        Instance::Approachability(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};

    fn experts2() -> RegretInstance {
        RegretInstance::new(
            "experts",
            Polytope::simplex(2),
            Polytope::cube(2, 0.into(), 1.into()),
            vec![
                AffineMapGen::constant("e1", Vector::unit(2, 0)),
                AffineMapGen::constant("e2", Vector::unit(2, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let inst = Instance::from(experts2());
        let s = inst.to_json();
        assert!(
            s.starts_with("{\n  \"kind\": \"regret\",\n  \"name\": \"experts\",\n  \"dim\": 2,")
        );
        assert!(s.ends_with("}\n"));
        let back = Instance::from_json(&s).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), s);

        let app = Instance::from(inst.to_approachability());
        let s = app.to_json();
        assert!(s.contains("\"U\""));
        assert_eq!(Instance::from_json(&s).unwrap().to_json(), s);
    }

    #[test]
    fn rejects_bad_files() {
        let s = Instance::from(experts2()).to_json();
        assert!(Instance::from_json(&s[..s.len() / 2]).is_err());
        assert!(Instance::from_json(&s.replace("\"dim\": 2", "\"dim\": 3")).is_err());
        assert!(Instance::from_json(&s.replace("\"regret\"", "\"other\"")).is_err());
        assert!(Instance::from_json(&s.replace("\"e2\"", "\"e1\"")).is_err());
        assert!(Instance::from_json(&s.replace("\"name\"", "\"nom\"")).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let bad = RegretInstance::new(
            "bad",
            Polytope::simplex(2),
            Polytope::simplex(3),
            vec![AffineMapGen::identity("id", 2)],
        );
        assert!(bad.is_err());
        let bad = ApproachabilityInstance::new(
            "bad",
            Polytope::simplex(2),
            Polytope::simplex(3),
            vec![BilinearGen::bilinear("u", Matrix::zeros(2, 2))],
        );
        assert!(bad.is_err());
    }
}
