use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub name: String,
    pub kind: String,
    pub default: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentInfo {
    pub name: String,
    pub summary: String,
    /// The mathematical statement the experiment checks.
    pub anchor: String,
    pub acceptance: bool,
    /// Whether `--replicas` is used.
    pub stochastic: bool,
    pub params: Vec<ParamInfo>,
}

const DOMAIN: &str = "path | [x0, x1, y0, y1] | [[x, y], ...]";

fn info(
    name: &str,
    summary: &str,
    anchor: &str,
    acceptance: bool,
    stochastic: bool,
    params: &[(&str, &str, &str)],
) -> ExperimentInfo {
    ExperimentInfo {
        name: name.into(),
        summary: summary.into(),
        anchor: anchor.into(),
        acceptance,
        stochastic,
        params: params
            .iter()
            .map(|&(n, k, d)| ParamInfo {
                name: n.into(),
                kind: k.into(),
                default: d.into(),
            })
            .collect(),
    }
}

pub fn catalog() -> Vec<ExperimentInfo> {
    vec![
        info(
            "fomin-exact",
            "Exact two-path Fomin sum against the hitting determinant",
            "Fomin's identity for n = 2: sum over eta of nu_LE(eta) h_{A minus eta}(x2, y2) = det[h_A]",
            true,
            false,
            &[("domain", DOMAIN, "[0, 4, 0, 4]"), ("points", "[[x, y]; 4] as x1, x2, y2, y1", "corners")],
        ),
        info(
            "fomin-mc",
            "Monte Carlo non-intersection probability for two loop-erased paths",
            "Fomin's identity for n = 2 via sampling",
            true,
            true,
            &[("domain", DOMAIN, "[0, 4, 0, 4]"), ("points", "[[x, y]; 4]", "corners")],
        ),
        info(
            "partition-eval",
            "phi_b on a grid with ODE residuals and closed-form table checks",
            "hypergeometric two-path partition function, its ODE, the special-case table and Cardy's formula",
            true,
            false,
            &[("b", "[float]", "[0, 0.25, 1, 1.75, 2.5]"), ("points", "int", "99")],
        ),
        info(
            "scalefomin",
            "Disk hitting-determinant ratio against (x/y)(2 - x/y)",
            "scaling limit of Fomin's identity",
            true,
            false,
            &[("points", "int", "100"), ("y", "float", "1")],
        ),
        info(
            "sle-avoid",
            "Probability that SLE_2 from 0 avoids a Brownian excursion from x to y",
            "P(gamma avoids beta) = (x/y)(2 - x/y)",
            true,
            true,
            &[
                ("x", "float", "0.5"),
                ("y", "float", "1"),
                ("geometric", "int (replicas of the intersection estimator)", "0"),
                ("dt", "float (units of y^2)", "1e-3"),
                ("t_ref", "float (units of y^2)", "1"),
                ("horizon", "float (units of y^2)", "1000"),
                ("trace_horizon", "float (units of y^2)", "16"),
                ("eps_factor", "float", "3"),
                ("excursion_dt", "float", "1e-3"),
            ],
        ),
        info(
            "hstar",
            "Monte Carlo H*(x, y) normalised by (y - x)^{2b}",
            "E[J_infinity] (y - x)^{2b} = phi_b(x/y)",
            true,
            true,
            &[
                ("b", "float", "1"),
                ("x", "float", "0.5"),
                ("y", "float", "1"),
                ("dt", "float (units of y^2)", "1e-3"),
                ("t_ref", "float (units of y^2)", "1"),
                ("horizon", "float (units of y^2)", "1000"),
            ],
        ),
        info(
            "martingale-check",
            "Mean of g_T'(x) under SLE_kappa, with a complex supplement",
            "the Loewner flow is a martingale exactly when kappa = 2",
            true,
            true,
            &[
                ("kappa", "float in (0, 4]", "2"),
                ("x", "float", "1"),
                ("t", "float", "1"),
                ("dt", "float", "1e-3"),
                ("z", "[re, im]", "[1, 1.5]"),
            ],
        ),
        info(
            "loop-lemma",
            "Law of the first concatenated loop at a point against q_A 4^{-|omega|}",
            "the rooted loop at z is distributed as q_A 4^{-|omega|}",
            true,
            true,
            &[("domain", DOMAIN, "[[0, 0], [1, 0]]"), ("root", "[x, y]", "first interior point"), ("l_max", "int", "16")],
        ),
        info(
            "loop-soup",
            "One realisation of the random walk loop soup",
            "Poissonian realisation of the lattice loop measure",
            false,
            false,
            &[("domain", DOMAIN, "[0, 2, 0, 2]"), ("intensity", "float", "1"), ("l_max", "int", "12")],
        ),
        info(
            "theta-identity",
            "Theta_A(eta) against exp m*(A; eta) for every self-avoiding excursion, plus attach-then-erase",
            "Theta_A(eta) = exp{m*(A; eta)} and loop erasure undoes loop attachment",
            true,
            true,
            &[("domain", DOMAIN, "[0, 2, 0, 2]"), ("z", "[x, y]", "first boundary point"), ("w", "[x, y]", "last boundary point")],
        ),
        info(
            "lambda-saw",
            "Total lambda-SAW mass, the lambda = 1 equivalence and an exploratory critical-r scan",
            "at lambda = 1, e^{-r} = 1/4 the lambda-SAW measure is the loop-erased measure",
            true,
            false,
            &[
                ("domain", DOMAIN, "[0, 2, 0, 2]"),
                ("z", "[x, y]", "left of the top-left corner"),
                ("w", "[x, y]", "right of the top-right corner"),
                ("r", "float", "ln 4"),
                ("lambda", "float", "1"),
                ("scan_widths", "[int]", "[1, 2, 3, 4]"),
                ("scan_r", "[float]", "1.0, 1.05, ..., 1.8"),
            ],
        ),
        info(
            "lattice-asymptotics",
            "h_H(0, N) against 1/(4 pi N^2)",
            "half-plane excursion kernel asymptotics",
            true,
            false,
            &[("n", "[int]", "[10, 20, 40]")],
        ),
        info(
            "sle-trace",
            "SLE_kappa driving function and trace polyline",
            "chordal Loewner evolution",
            false,
            false,
            &[("kappa", "float in (0, 4]", "2"), ("t", "float", "1"), ("dt", "float", "1e-3")],
        ),
        info(
            "brownian-excursion",
            "Brownian excursion in H from x to y",
            "Brownian motion from x conditioned to leave H at y",
            false,
            false,
            &[("x", "float", "0"), ("y", "float", "1"), ("dt", "float", "1e-3")],
        ),
        info(
            "kappa-rho",
            "SLE(kappa, rho) driving toward a finite target",
            "the weighted path has finite lifetime",
            false,
            true,
            &[
                ("kappa", "float in (0, 4]", "2"),
                ("x0", "float", "0"),
                ("y", "float", "1"),
                ("t", "float", "10"),
                ("dt", "float", "1e-4"),
            ],
        ),
        info(
            "two-path",
            "Two mutually avoiding paths grown simultaneously",
            "far-field expansion g_t(z) = z + 2at/z + ...",
            false,
            false,
            &[
                ("kappa", "float in (0, 4]", "2"),
                ("x0", "float", "0"),
                ("x1", "float", "1"),
                ("t", "float", "1"),
                ("dt", "float", "1e-3"),
            ],
        ),
    ]
}

pub fn find(name: &str) -> Option<ExperimentInfo> {
    catalog().into_iter().find(|e| e.name == name)
}
