use bnsentinel::demo_nets::disease_network;
use bnsentinel::random::{dirichlet_row, random_network, RandomNetConfig};
use bnsentinel::rebuttal::odds_to_probability;
use bnsentinel::report::{sig, sig_matrix, sig_opt};
use bnsentinel::{
    conflict_cj, explicit_straw, independence_straw, rebuttal_likelihood_ratio,
    rebuttal_posterior_odds, surprise_tails, BayesNet, EvidenceItem, EvidenceSession, NodeModel,
    RebuttalSpec, Variable,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo reports always serialize")
}

#[derive(Debug, Serialize)]
struct ConflictTable {
    #[serde(serialize_with = "sig_matrix")]
    joint: Vec<Vec<f64>>,
    #[serde(serialize_with = "sig_matrix")]
    product: Vec<Vec<f64>>,
    /// `None` for cells with zero joint probability.
    conflict: Vec<Vec<Cell>>,
    #[serde(serialize_with = "sig")]
    positive_conflict_probability: f64,
    #[serde(serialize_with = "sig")]
    expected_conflict: f64,
}

#[derive(Debug, Serialize)]
#[serde(transparent)]
struct Cell(#[serde(serialize_with = "sig_opt")] Option<f64>);

/// Builds `X -> Y` from a non-negative table (rows are `X`, columns `Y`,
/// rescaled to sum to one) and reports its conflict tables.
pub fn conflict_table(joint_json: &str) -> Result<String, String> {
    let raw: Vec<Vec<f64>> = serde_json::from_str(joint_json).map_err(|e| e.to_string())?;
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || raw.iter().any(|r| r.len() != cols) {
        return Err("need a rectangular table with at least 2 rows and 2 columns".into());
    }
    if raw.iter().flatten().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err("entries must be finite and non-negative".into());
    }
    let total: f64 = raw.iter().flatten().sum();
    if total <= 0.0 {
        return Err("table sums to zero".into());
    }
    let joint: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| r.iter().map(|p| p / total).collect())
        .collect();
    let x_prior: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cpt: Vec<Vec<f64>> = joint
        .iter()
        .zip(&x_prior)
        .map(|(r, &px)| {
            if px > 0.0 {
                r.iter().map(|p| p / px).collect()
            } else {
                vec![1.0 / cols as f64; cols]
            }
        })
        .collect();
    let x_labels: Vec<String> = (1..=rows).map(|i| format!("x{i}")).collect();
    let y_labels: Vec<String> = (1..=cols).map(|i| format!("y{i}")).collect();
    let xl: Vec<&str> = x_labels.iter().map(String::as_str).collect();
    let yl: Vec<&str> = y_labels.iter().map(String::as_str).collect();
    let net = BayesNet::build(
        vec![Variable::new("X", &xl), Variable::new("Y", &yl)],
        vec![
            NodeModel::root("X", x_prior),
            NodeModel::new("Y", &["X"], cpt),
        ],
    )
    .map_err(|e| e.to_string())?;

    let straw = independence_straw(&net, &["X", "Y"]).map_err(|e| e.to_string())?;
    let mut product = vec![vec![0.0; cols]; rows];
    let mut conflict = Vec::with_capacity(rows);
    let mut positive = 0.0;
    let mut expected = 0.0;
    for x in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for y in 0..cols {
            product[x][y] = straw.probability_of_config(&[x, y]);
            let p = joint[x][y];
            if p > 0.0 {
                let mut session = EvidenceSession::new(&net);
                session.absorb_indexed(0, x).map_err(|e| e.to_string())?;
                session.absorb_indexed(1, y).map_err(|e| e.to_string())?;
                let c = conflict_cj(&session).map_err(|e| e.to_string())?;
                if c > 0.0 {
                    positive += p;
                }
                expected += p * c;
                row.push(Cell(Some(c)));
            } else {
                row.push(Cell(None));
            }
        }
        conflict.push(row);
    }
    Ok(to_json(&ConflictTable {
        joint,
        product,
        conflict,
        positive_conflict_probability: positive,
        expected_conflict: expected.min(0.0),
    }))
}

#[derive(Debug, Serialize)]
struct TailPoint {
    #[serde(rename = "K")]
    k: u32,
    #[serde(serialize_with = "sig")]
    pi_k: f64,
    #[serde(serialize_with = "sig")]
    bound: f64,
}

#[derive(Debug, Serialize)]
struct TailCurve {
    variables: Vec<String>,
    edges: usize,
    straw: &'static str,
    points: Vec<TailPoint>,
}

/// `pi_K` for `K = 0..=max_k` on a random network drawn from `seed`, with
/// either the independence straw or a random explicit straw table.
pub fn tail_curve(seed: u64, explicit: bool, max_k: u32) -> Result<String, String> {
    if max_k > 64 {
        return Err("max K is 64".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, &RandomNetConfig::default());
    let names: Vec<String> = net.variables().iter().map(|v| v.name.clone()).collect();
    let scope: Vec<&str> = names.iter().map(String::as_str).collect();
    let straw = if explicit {
        let size = (0..net.num_variables())
            .map(|v| net.cardinality(v))
            .product();
        explicit_straw(&net, &scope, dirichlet_row(&mut rng, size))
    } else {
        independence_straw(&net, &scope)
    }
    .map_err(|e| e.to_string())?;
    let ks: Vec<f64> = (0..=max_k).map(f64::from).collect();
    let tails = surprise_tails(&net, &straw, &scope, &ks).map_err(|e| e.to_string())?;
    Ok(to_json(&TailCurve {
        edges: (0..net.num_variables()).map(|v| net.parents(v).len()).sum(),
        variables: names,
        straw: if explicit { "explicit" } else { "independence" },
        points: tails
            .iter()
            .zip(0..)
            .map(|(t, k)| TailPoint {
                k,
                pi_k: t.pi_k,
                bound: t.bound,
            })
            .collect(),
    }))
}

#[derive(Debug, Serialize)]
struct MonitorStep {
    variable: String,
    outcome: String,
    #[serde(serialize_with = "sig")]
    conflict_bits: f64,
    #[serde(serialize_with = "sig")]
    disease_probability: f64,
    #[serde(serialize_with = "sig")]
    rebuttal_probability: f64,
}

/// Absorbs the items into the rare-disease network, with a rebuttal on the
/// test `T` whose straw gives a positive result with `straw_positive`.
pub fn rebuttal_monitor(
    evidence_json: &str,
    prior_true: f64,
    straw_positive: f64,
) -> Result<String, String> {
    let items: Vec<EvidenceItem> =
        serde_json::from_str(evidence_json).map_err(|e| e.to_string())?;
    if !(0.0..=1.0).contains(&straw_positive) {
        return Err("straw probability must be in [0, 1]".into());
    }
    let net = disease_network();
    let spec = RebuttalSpec::new("T", vec![straw_positive, 1.0 - straw_positive], prior_true)
        .checked(&net)
        .map_err(|e| e.to_string())?;
    let mut session = EvidenceSession::new(&net);
    let mut steps = Vec::with_capacity(items.len());
    for item in items {
        session
            .absorb(&item.variable, &item.outcome)
            .map_err(|e| e.to_string())?;
        let lr = rebuttal_likelihood_ratio(&session, &spec).map_err(|e| e.to_string())?;
        let odds = rebuttal_posterior_odds(lr.value, &spec);
        steps.push(MonitorStep {
            conflict_bits: conflict_cj(&session).map_err(|e| e.to_string())?,
            disease_probability: session
                .posterior("D")
                .map_err(|e| e.to_string())?
                .distribution[0],
            rebuttal_probability: odds_to_probability(odds),
            variable: item.variable,
            outcome: item.outcome,
        });
    }
    Ok(to_json(&steps))
}
