use crate::error::{Error, Result};
use crate::factstore::Schema;
use crate::real::Real;
use crate::treelearn::{parse_modes, ModeDecl};

pub const TARGET: &str = "match";
pub const APPLIED: &str = "prAppliedJob";
pub const RECOMMENDED: &str = "recommended";
pub const DISTANCE: &str = "userJobDis";
pub const DIST_BUCKETS: [&str; 4] = ["1", "2", "3", "4"];

/// `(comm predicate, user attribute predicate it is induced from)`.
pub const COMM_SOURCES: [(&str, &str); 3] = [
    ("commSkill", "userSkill"),
    ("commClass", "userClass"),
    ("commCity", "userCity"),
];

const SCHEMA_TEXT: &str = "\
type user.
type job.
type skill.
type class.
type city.
type company.
type title.
type distbucket.
pred jobSkill(job, skill).
pred userSkill(user, skill).
pred jobClass(job, class).
pred userClass(user, class).
pred prAppliedJob(user, job).
pred userJobDis(user, job, distbucket).
pred userCity(user, city).
pred mostRecentCompany(user, company).
pred mostRecentJobTitle(user, title).
pred commSkill(user, user).
pred commClass(user, user).
pred commCity(user, user).
pred recommended(user, job).
pred match(user, job).
";

/// The job-recommendation schema, including the `recommended/2` log and
/// the `match/2` target.
pub fn rec_schema() -> Schema {
    Schema::parse(SCHEMA_TEXT).expect("built-in schema is well formed")
}

/// Distance bucket: 1 below 15 miles, 2 below 30, 3 up to and including
/// 60, 4 beyond.
pub fn discretize_distance<T: Real>(miles: T) -> Result<u8> {
    if miles.is_nan() || miles < T::zero() {
        return Err(Error::Domain(format!(
            "distance must be nonnegative, got {miles}"
        )));
    }
    Ok(if miles < T::lit(15.0) {
        1
    } else if miles < T::lit(30.0) {
        2
    } else if miles <= T::lit(60.0) {
        3
    } else {
        4
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Content,
    Hybrid,
}

impl std::str::FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "content" => Ok(PresetKind::Content),
            "hybrid" => Ok(PresetKind::Hybrid),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected content or hybrid)"
            ))),
        }
    }
}

impl PresetKind {
    pub fn name(self) -> &'static str {
        match self {
            PresetKind::Content => "content",
            PresetKind::Hybrid => "hybrid",
        }
    }
}

const CONTENT_MODES: &str = "\
mode userSkill(+user, -skill).
mode userSkill(+user, +skill).
mode userSkill(+user, #skill).
mode jobSkill(+job, -skill).
mode jobSkill(+job, +skill).
mode jobSkill(+job, #skill).
mode userClass(+user, -class).
mode userClass(+user, +class).
mode userClass(+user, #class).
mode jobClass(+job, -class).
mode jobClass(+job, +class).
mode jobClass(+job, #class).
mode userCity(+user, #city).
mode mostRecentCompany(+user, #company).
mode mostRecentJobTitle(+user, #title).
mode userJobDis(+user, +job, #distbucket).
";

const COLLABORATIVE_MODES: &str = "\
mode prAppliedJob(+user, -job).
mode prAppliedJob(+user, +job).
mode commSkill(+user, -user).
mode commClass(+user, -user).
mode commCity(+user, -user).
";

/// Mode text for a preset. The hybrid preset is the content preset plus the
/// collaborative bridges; attribute modes take `+` on any bound user or job
/// variable, so they also apply to users and jobs reached over a bridge.
pub fn mode_preset_text(kind: PresetKind) -> String {
    match kind {
        PresetKind::Content => CONTENT_MODES.to_string(),
        PresetKind::Hybrid => format!("{CONTENT_MODES}{COLLABORATIVE_MODES}"),
    }
}

pub fn mode_preset(schema: &Schema, kind: PresetKind) -> Result<Vec<ModeDecl>> {
    parse_modes(schema, &mode_preset_text(kind))
}
