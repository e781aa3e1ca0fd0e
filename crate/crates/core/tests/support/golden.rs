//! Hand-written expectations for the shipped WaveToy and CartGrid manifests.

use thornflesh::ccl::*;

fn grid_function(name: &str, timelevels: u8, ghost: u8, members: &[(&str, Parity)]) -> GroupDecl {
    GroupDecl {
        name: name.into(),
        kind: GroupKind::GridFunction,
        timelevels,
        ghost,
        parity: Parity::Even,
        members: members
            .iter()
            .map(|&(n, parity)| MemberDecl { name: n.into(), parity })
            .collect(),
    }
}

fn real(name: &str, description: &str, lo: Option<f64>, lo_inclusive: bool, default: f64) -> ParamDecl {
    ParamDecl {
        name: name.into(),
        ptype: ParamType::Real,
        description: description.into(),
        range: ParamRange::Real {
            lo: Bound { value: lo, inclusive: lo_inclusive },
            hi: Bound::unbounded(),
        },
        default: ParamValue::Real(default),
        steerable: Steerable::Never,
    }
}

fn keyword(name: &str, description: &str, set: &[&str], default: &str) -> ParamDecl {
    ParamDecl {
        name: name.into(),
        ptype: ParamType::Keyword,
        description: description.into(),
        range: ParamRange::Keywords(set.iter().map(|s| s.to_string()).collect()),
        default: ParamValue::Keyword(default.into()),
        steerable: Steerable::Never,
    }
}

fn item(routine: &str, location: ScheduleLocation, reads: &[&str], writes: &[&str], sync: &[&str], description: &str) -> ScheduleDecl {
    let refs = |v: &[&str]| {
        v.iter()
            .map(|s| {
                let (i, g) = s.split_once("::").unwrap();
                GroupRef::new(i, g)
            })
            .collect()
    };
    ScheduleDecl {
        routine: routine.into(),
        location,
        before: vec![],
        after: vec![],
        reads: refs(reads),
        writes: refs(writes),
        sync: refs(sync),
        description: description.into(),
    }
}

pub fn shipped(name: &str) -> ThornManifest {
    let src = thornflesh::thorns::MANIFESTS.iter().find(|(n, _)| *n == name).unwrap().1;
    parse_manifest(src).unwrap()
}

pub fn wavetoy_expected() -> ThornManifest {
    ThornManifest {
        thorn_name: "WaveToy".into(),
        implementation: "wavetoy".into(),
        inherits: vec!["driver".into(), "mol".into()],
        groups: vec![
            grid_function("scalars", 2, 1, &[("phi", Parity::Even), ("pi", Parity::Odd)]),
            grid_function("rhs", 1, 0, &[("phi_rhs", Parity::Even), ("pi_rhs", Parity::Even)]),
        ],
        params: vec![
            real("amplitude", "Initial amplitude", Some(0.0), true, 1.0),
            keyword("mode", "Initial data", &["gaussian", "standing"], "standing"),
            real("c", "Wave speed", Some(0.0), false, 1.0),
            real("x0", "Gaussian centre on every axis", None, true, 0.5),
            real("sigma", "Gaussian width", Some(0.0), true, 0.1),
            keyword("bound", "Condition applied on physical faces", &["reflective", "radiative"], "reflective"),
        ],
        schedule_items: vec![
            item("WaveToy_Register", ScheduleLocation::Bin(Bin::Startup), &[], &[], &[], "Register phi and pi with the time integrator"),
            item("WaveToy_CheckCFL", ScheduleLocation::Bin(Bin::ParamCheck), &[], &[], &[], "Warn when dt exceeds the 1D stability bound h/c"),
            item(
                "WaveToy_InitialData",
                ScheduleLocation::Bin(Bin::Initial),
                &[],
                &["wavetoy::scalars"],
                &["wavetoy::scalars"],
                "Set up initial data",
            ),
            item(
                "WaveToy_RHS",
                ScheduleLocation::Group("MoL_CalcRHS".into()),
                &["wavetoy::scalars"],
                &["wavetoy::rhs"],
                &[],
                "Evaluate the wave equation right-hand side",
            ),
            item(
                "WaveToy_Boundary",
                ScheduleLocation::Group("MoL_PostStep".into()),
                &[],
                &["wavetoy::scalars"],
                &["wavetoy::scalars"],
                "Apply boundary conditions and refresh ghosts",
            ),
        ],
    }
}

pub fn driver_expected() -> ThornManifest {
    let int = |name: &str, description: &str, lo: i64, hi: Option<i64>, default: i64, steerable| ParamDecl {
        name: name.into(),
        ptype: ParamType::Int,
        description: description.into(),
        range: ParamRange::Int {
            lo: Bound { value: Some(lo), inclusive: true },
            hi: Bound { value: hi, inclusive: true },
        },
        default: ParamValue::Int(default),
        steerable,
    };
    let mut t_final = real("t_final", "Evolution stops once this time is reached", Some(0.0), true, 1.0);
    t_final.steerable = Steerable::Recover;
    ThornManifest {
        thorn_name: "CartGrid".into(),
        implementation: "driver".into(),
        inherits: vec![],
        groups: vec![],
        params: vec![
            int("dimensions", "Number of spatial dimensions", 1, Some(3), 1, Steerable::Never),
            int("global_n", "Interior points per axis", 1, None, 100, Steerable::Never),
            real("lower", "Lower coordinate bound on every axis", None, true, 0.0),
            real("upper", "Upper coordinate bound on every axis", None, true, 1.0),
            keyword("boundary", "Topology of every axis", &["periodic", "physical"], "periodic"),
            t_final,
            int("partitions", "Number of slab partitions", 1, None, 1, Steerable::Recover),
        ],
        schedule_items: vec![],
    }
}
