//! Fixed verification suites, one per acceptance criterion, and the combined desk suite.

use std::f64::consts::LN_2;

use anyonstack_core::character::{character_table, tensor_character, ORTHOGONALITY_TOL};
use anyonstack_core::double::{fusion_factorization_check, fusion_isomorphism_check, stack_count_check};
use anyonstack_core::entropy::{
    annulus_around_block, axiom_a0_check, block_regions, mutual_information, ssa_random_check, tee_fit,
    zero_mutual_information_chain, DenseState, EntropySource, RegionPoint, DENSE_REGION_CAP,
};
use anyonstack_core::group::{build_group, direct_product, FiniteGroup, GroupSpec, DEFAULT_GROUP_CAP};
use anyonstack_core::lattice::{BoundaryConvention, LatticeSpec};
use anyonstack_core::qd::{
    commutation_check, frustration_check, ground_state, ground_state_stack_check, stack_operator_check,
    PAIR_CHECK_CAP,
};
use anyonstack_core::report::{max_error, Check};
use anyonstack_core::ribbon::{
    reference_ribbons, ribbon_factorization_check, ribbon_locality_check, DEFAULT_MAX_RIBBON_LENGTH,
    DEFAULT_TUPLE_BUDGET,
};
use anyonstack_core::set_model::{set_check, Coupling, SetLattice};
use anyonstack_core::stabilizer::toric_code;
use anyonstack_core::Result;
use clap::ValueEnum;
use serde_json::{json, Value};

/// Groups used for the sector-counting suite.
pub const COUNTING_GROUPS: [&str; 7] = ["Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8"];

/// Groups whose character tables are checked.
pub const CHARACTER_GROUPS: [&str; 13] =
    ["trivial", "Z2", "Z3", "Z4", "Z5", "Z6", "Z2xZ2", "S3", "D4", "D5", "Q8", "S4", "Z2xS3"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Counting,
    Fusion,
    Stacking,
    Frustration,
    Ribbons,
    Entropy,
    Set,
    Characters,
    /// Every suite above, in order.
    Desk,
}

impl Suite {
    pub const PARTS: [Suite; 8] = [
        Suite::Counting,
        Suite::Fusion,
        Suite::Stacking,
        Suite::Frustration,
        Suite::Ribbons,
        Suite::Entropy,
        Suite::Set,
        Suite::Characters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Counting => "counting",
            Suite::Fusion => "fusion",
            Suite::Stacking => "stacking",
            Suite::Frustration => "frustration",
            Suite::Ribbons => "ribbons",
            Suite::Entropy => "entropy",
            Suite::Set => "set",
            Suite::Characters => "characters",
            Suite::Desk => "desk",
        }
    }
}

pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub payload: Value,
    pub points: Vec<(BoundaryConvention, RegionPoint)>,
}

pub fn named(name: &str) -> Result<FiniteGroup> {
    build_group(&GroupSpec::named(name), DEFAULT_GROUP_CAP)
}

pub fn run_suite(suite: Suite, seed: u64, max_dim: usize) -> Result<SuiteOutput> {
    if suite == Suite::Desk {
        let mut out = SuiteOutput {
            checks: Vec::new(),
            payload: json!({}),
            points: Vec::new(),
        };
        for part in Suite::PARTS {
            let r = run_suite(part, seed, max_dim)?;
            out.checks.extend(r.checks);
            out.payload[part.name()] = r.payload;
            out.points.extend(r.points);
        }
        return Ok(out);
    }
    let (checks, payload, points) = match suite {
        Suite::Counting => counting(seed)?,
        Suite::Fusion => fusion(seed)?,
        Suite::Stacking => stacking(seed, max_dim)?,
        Suite::Frustration => frustration(max_dim)?,
        Suite::Ribbons => ribbons(seed)?,
        Suite::Entropy => entropy(seed, max_dim)?,
        Suite::Set => set()?,
        Suite::Characters => characters(seed)?,
        Suite::Desk => unreachable!(),
    };
    Ok(SuiteOutput { checks, payload, points })
}

type Parts = (Vec<Check>, Value, Vec<(BoundaryConvention, RegionPoint)>);

fn counting(seed: u64) -> Result<Parts> {
    let groups = COUNTING_GROUPS.iter().map(|n| named(n)).collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut products = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        for h in &groups[i..] {
            let (c, report) = stack_count_check(g, h, DEFAULT_GROUP_CAP, seed)?;
            checks.extend(c);
            products.push(json!({
                "left": report.left_group,
                "right": report.right_group,
                "left_count": report.left_count,
                "right_count": report.right_count,
                "product_count": report.product_count,
                "bijection_size": report.bijection.len(),
            }));
        }
    }
    Ok((checks, json!({ "pairs": products }), Vec::new()))
}

fn fusion(seed: u64) -> Result<Parts> {
    let mut checks = Vec::new();
    for (a, b) in [("Z2", "Z2"), ("Z2", "Z3"), ("Z2", "S3")] {
        checks.extend(fusion_factorization_check(&named(a)?, &named(b)?, DEFAULT_GROUP_CAP, seed)?);
    }
    let z2xz3 = direct_product(&named("Z2")?, &named("Z3")?, DEFAULT_GROUP_CAP)?.group;
    checks.extend(fusion_isomorphism_check(&z2xz3, &named("Z6")?, seed)?);
    Ok((checks, json!({ "pairs": [["Z2", "Z2"], ["Z2", "Z3"], ["Z2", "S3"]], "isomorphic": ["Z2xZ3", "Z6"] }), Vec::new()))
}

fn stacking(seed: u64, max_dim: usize) -> Result<Parts> {
    let lat = LatticeSpec::torus(2, 2)?;
    let mut checks = Vec::new();
    for (a, b) in [("Z2", "Z2"), ("Z2", "Z3")] {
        let (g, h) = (named(a)?, named(b)?);
        checks.extend(stack_operator_check(&g, &h, &lat, DEFAULT_GROUP_CAP)?);
        checks.extend(ground_state_stack_check(&g, &h, &lat, max_dim, 100, seed)?);
    }
    Ok((checks, json!({ "lattice": "torus 2x2", "observables": 100 }), Vec::new()))
}

fn frustration(max_dim: usize) -> Result<Parts> {
    let mut checks = Vec::new();
    let mut cases = Vec::new();
    for (name, lx, ly) in [("Z2", 2, 2), ("Z2", 3, 2), ("Z3", 2, 2), ("Z3", 3, 2), ("S3", 2, 2)] {
        let g = named(name)?;
        let lat = LatticeSpec::torus(lx, ly)?;
        let tag = format!("{name} torus {lx}x{ly}");
        let psi = ground_state(&lat, &g, max_dim)?;
        checks.extend(frustration_check(&lat, &g, &psi, &tag)?);
        checks.extend(commutation_check(&lat, &g, PAIR_CHECK_CAP, &tag)?);
        cases.push(json!({ "group": name, "lx": lx, "ly": ly, "dim": psi.space.dim() }));
    }
    Ok((checks, json!({ "cases": cases }), Vec::new()))
}

fn ribbons(seed: u64) -> Result<Parts> {
    let lat = LatticeSpec::torus(3, 3)?;
    let (z2, z3) = (named("Z2")?, named("Z3")?);
    let k = direct_product(&z2, &z2, DEFAULT_GROUP_CAP)?.group;
    let mut checks = Vec::new();
    let mut names = Vec::new();
    for (name, ribbon) in reference_ribbons(&lat)? {
        for (h, budget) in [(&z2, DEFAULT_TUPLE_BUDGET), (&z3, 16)] {
            checks.extend(ribbon_factorization_check(&z2, h, &lat, &ribbon, budget, seed)?.into_iter().map(|mut c| {
                c.name = format!("{} {name}", c.name);
                c
            }));
        }
        let valid = ribbon.validate(&lat, DEFAULT_MAX_RIBBON_LENGTH)?;
        checks.extend(ribbon_locality_check(&lat, &k, &valid, PAIR_CHECK_CAP, &format!("Z2xZ2 {name}"))?);
        names.push(json!({ "name": name, "length": valid.len(), "ribbon": ribbon }));
    }
    Ok((checks, json!({ "lattice": "torus 3x3", "ribbons": names }), Vec::new()))
}

fn entropy(seed: u64, max_dim: usize) -> Result<Parts> {
    let lat = LatticeSpec::torus(4, 4)?;
    let stab = toric_code(&lat)?;
    let mut checks = Vec::new();
    let mut points = Vec::new();

    let regions = block_regions(&lat, &[(1, 1), (1, 2), (2, 2), (2, 3)])?;
    let mut fits = Vec::new();
    for conv in [BoundaryConvention::CutVertices, BoundaryConvention::HalfEdges, BoundaryConvention::DanglingEdges] {
        let fit = tee_fit(&stab, &lat, &regions, conv)?;
        points.extend(fit.points.iter().cloned().map(|p| (conv, p)));
        fits.push(fit);
    }
    checks.push(
        Check::within("tee_gamma[toric 4x4]", (fits[0].gamma - LN_2).abs(), 1e-6)
            .with_detail(format!("gamma = {} nats", fits[0].gamma)),
    );
    checks.push(Check::within("tee_residual[toric 4x4]", fits[0].residual, 1e-8));
    checks.push(Check::within(
        "tee_convention_invariance[toric 4x4]",
        (fits[1].gamma - fits[0].gamma).abs(),
        1e-9,
    ));

    // regions separated by at least one full star or plaquette
    let far_pairs = [
        (lat.closed_block(0, 0, 1, 1)?, lat.closed_block(2, 2, 1, 1)?),
        (lat.closed_block(0, 0, 1, 1)?, vec![10]),
        (vec![0], vec![10]),
        (lat.closed_block(0, 0, 2, 1)?, vec![lat.num_edges() - 1 - 4]),
    ];
    let mut separation_ok = true;
    let mut mi = Vec::new();
    for (a, c) in &far_pairs {
        separation_ok &= lat.region_distance(a, c) >= 2;
        mi.push(mutual_information(&stab, a, c)?.abs());
    }
    checks.push(Check::holds("separated_regions[toric 4x4]", separation_ok));
    checks.push(
        Check::within("zero_mutual_information[toric 4x4]", max_error(mi), 1e-10)
            .with_detail(format!("{} region pairs at distance >= 2", far_pairs.len())),
    );

    let (b, c) = annulus_around_block(&lat, 0, 0, 1, 1)?;
    checks.push(axiom_a0_check(&stab, &lat, &b, &c, "toric 4x4")?);
    let lat6 = LatticeSpec::torus(6, 6)?;
    let stab6 = toric_code(&lat6)?;
    let (b6, c6) = annulus_around_block(&lat6, 0, 0, 1, 1)?;
    let a6 = lat6.closed_block(4, 4, 1, 1)?;
    let chain = zero_mutual_information_chain(&stab6, &lat6, &a6, &b6.edges, &c6.edges)?;
    checks.push(Check::within("a0_ssa_chain[toric 6x6]", chain.mutual_information.abs(), 1e-10).with_detail(format!(
        "A0 term {:e}, SSA term {:e}",
        chain.a0, chain.ssa_term
    )));
    checks.push(ssa_random_check(&stab, 50, 6, seed, "toric 4x4")?);

    // dense and stabilizer paths on tori small enough for state vectors
    let mut agreement = Vec::new();
    let mut purity = Vec::new();
    let z2 = named("Z2")?;
    for (lx, ly) in [(2, 2), (3, 2), (3, 3)] {
        let small = LatticeSpec::torus(lx, ly)?;
        let psi = ground_state(&small, &z2, max_dim)?;
        let dense = DenseState {
            state: &psi,
            cap: DENSE_REGION_CAP,
        };
        let s = toric_code(&small)?;
        let n = small.num_edges();
        for k in 0..n {
            // contiguous windows and strided sets of edges
            for region in [
                (k..(k + 1 + k % 7).min(n)).collect::<Vec<_>>(),
                (0..n).filter(|e| (e + k) % 3 == 0).collect(),
            ] {
                agreement.push((dense.entropy(&region)? - EntropySource::entropy(&s, &region)?).abs());
                let complement: Vec<usize> = (0..n).filter(|e| !region.contains(e)).collect();
                if region.len() <= 9 && complement.len() <= 9 && !complement.is_empty() {
                    let direct = |r: &[usize]| -> Result<f64> {
                        Ok(anyonstack_core::entropy::von_neumann_entropy(
                            &anyonstack_core::entropy::reduced_density_matrix(&psi, r, DENSE_REGION_CAP)?,
                        ))
                    };
                    purity.push((direct(&region)? - direct(&complement)?).abs());
                }
            }
        }
    }
    checks.push(
        Check::within("dense_stabilizer_agreement[toric small tori]", max_error(agreement.iter().copied()), 1e-9)
            .with_detail(format!("{} regions on 2x2, 3x2 and 3x3 tori", agreement.len())),
    );
    checks.push(
        Check::within("purity_symmetry[toric small tori]", max_error(purity.iter().copied()), 1e-9)
            .with_detail(format!("{} region/complement pairs", purity.len())),
    );

    let fit_json: Vec<Value> = fits
        .iter()
        .map(|f| json!({ "convention": f.convention, "alpha": f.alpha, "gamma": f.gamma, "gamma_bits": f.gamma_bits, "residual": f.residual }))
        .collect();
    Ok((checks, json!({ "lattice": "torus 4x4", "fits": fit_json, "a0_chain": chain }), points))
}

fn set() -> Result<Parts> {
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let cases = [
        (LatticeSpec::open(2, 2)?, Coupling::Enriched),
        (LatticeSpec::open(3, 2)?, Coupling::Enriched),
        (LatticeSpec::torus(2, 2)?, Coupling::Enriched),
        (LatticeSpec::open(2, 2)?, Coupling::Decoupled),
    ];
    for (base, coupling) in cases {
        let tag = format!(
            "{} {}x{}{}",
            if base.boundary() == anyonstack_core::lattice::Boundary::Torus { "torus" } else { "open" },
            base.lx(),
            base.ly(),
            if coupling == Coupling::Decoupled { " decoupled" } else { "" }
        );
        let (c, report) = set_check(&SetLattice::new(base)?, coupling, &tag)?;
        checks.extend(c);
        reports.push(report);
    }
    Ok((checks, json!({ "cases": reports }), Vec::new()))
}

fn characters(seed: u64) -> Result<Parts> {
    let mut checks = Vec::new();
    let mut sizes = Vec::new();
    for name in CHARACTER_GROUPS {
        let g = named(name)?;
        let t = character_table(&g, seed)?;
        checks.push(Check::within(format!("row_orthogonality[{name}]"), t.row_orthogonality_error(), ORTHOGONALITY_TOL));
        checks.push(Check::within(
            format!("column_orthogonality[{name}]"),
            t.column_orthogonality_error(),
            ORTHOGONALITY_TOL,
        ));
        checks.push(Check::count(
            format!("degree_squares[{name}]"),
            t.degrees.iter().map(|d| d * d).sum(),
            g.order(),
        ));
        sizes.push(json!({ "group": name, "order": g.order(), "irreps": t.num_irreps(), "degrees": t.degrees }));
    }
    for (a, b) in [("Z2", "Z3"), ("Z2", "S3"), ("S3", "Z3"), ("Z2", "Q8"), ("D4", "Z2"), ("S3", "S3")] {
        let (g, h) = (named(a)?, named(b)?);
        let product = direct_product(&g, &h, DEFAULT_GROUP_CAP)?;
        let tensor = tensor_character(&character_table(&g, seed)?, &character_table(&h, seed)?, &product)?;
        let direct = character_table(&product.group, seed)?;
        checks.push(Check::holds(
            format!("tensor_table[{a}x{b}]"),
            tensor.row_permutation_to(&direct, ORTHOGONALITY_TOL).is_some(),
        ));
    }
    Ok((checks, json!({ "groups": sizes }), Vec::new()))
}
