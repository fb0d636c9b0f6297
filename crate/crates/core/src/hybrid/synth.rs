use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boost::LabeledExample;
use crate::error::{Error, Result};
use crate::factstore::{strip_comment, ConstId, FactBase, GroundAtom, Universe};

use super::comm::induce_comm;
use super::dataset::DatasetSplit;
use super::domain::{discretize_distance, rec_schema, DIST_BUCKETS};
use super::examples::build_examples;

/// Inclusive integer range written `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRange {
    pub lo: usize,
    pub hi: usize,
}

impl CountRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    fn range(self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

impl fmt::Display for CountRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for CountRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected a range like `3..8`, got `{s}`"));
        let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        Ok(Self { lo, hi })
    }
}

/// Parameters of the synthetic job-recommendation generator.
///
/// Users and jobs belong to a class, live near a city and carry skills drawn
/// mostly from their class's skill pool. A user-job pair matches iff they
/// share at least `min_shared_skills` skills and the distance bucket is at
/// most `max_dist_bucket`. Only an `open_fraction` share of jobs is open for
/// recommendation. Each user is sent `candidates_per_user` open jobs (a
/// `match_bias` share from the user's matching jobs, the rest from jobs
/// sharing a skill with the user), each recommended with probability
/// `rec_rate`. Matching recommendations are applied to with probability
/// `1 - apply_noise`. Only a `skill_visibility` share of each user's skills
/// is listed on the profile, so sparse profiles leave room for evidence
/// from applications.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_jobs: usize,
    pub n_skills: usize,
    pub n_classes: usize,
    pub n_cities: usize,
    pub n_companies: usize,
    pub n_titles: usize,
    pub skills_per_user: CountRange,
    pub skills_per_job: CountRange,
    pub class_affinity: f64,
    pub skill_visibility: f64,
    pub min_shared_skills: usize,
    pub max_dist_bucket: u8,
    pub region_miles: f64,
    pub jitter_miles: f64,
    pub candidates_per_user: usize,
    pub match_bias: f64,
    pub open_fraction: f64,
    pub rec_rate: f64,
    pub apply_noise: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 500,
            n_jobs: 2000,
            n_skills: 60,
            n_classes: 3,
            n_cities: 12,
            n_companies: 40,
            n_titles: 30,
            skills_per_user: CountRange::new(3, 8),
            skills_per_job: CountRange::new(3, 8),
            class_affinity: 0.8,
            skill_visibility: 0.1,
            min_shared_skills: 2,
            max_dist_bucket: 3,
            region_miles: 75.0,
            jitter_miles: 5.0,
            candidates_per_user: 20,
            match_bias: 0.3,
            open_fraction: 0.04,
            rec_rate: 1.0,
            apply_noise: 0.1,
            test_fraction: 0.5,
            seed: 0,
        }
    }
}

macro_rules! synth_fields {
    ($m:ident) => {
        $m!(
            n_users,
            n_jobs,
            n_skills,
            n_classes,
            n_cities,
            n_companies,
            n_titles,
            skills_per_user,
            skills_per_job,
            class_affinity,
            skill_visibility,
            min_shared_skills,
            max_dist_bucket,
            region_miles,
            jitter_miles,
            candidates_per_user,
            match_bias,
            open_fraction,
            rec_rate,
            apply_noise,
            test_fraction,
            seed
        )
    };
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_users", self.n_users),
            ("n_jobs", self.n_jobs),
            ("n_skills", self.n_skills),
            ("n_classes", self.n_classes),
            ("n_cities", self.n_cities),
            ("n_companies", self.n_companies),
            ("n_titles", self.n_titles),
            ("min_shared_skills", self.min_shared_skills),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        let probs = [
            ("class_affinity", self.class_affinity),
            ("skill_visibility", self.skill_visibility),
            ("match_bias", self.match_bias),
            ("open_fraction", self.open_fraction),
            ("rec_rate", self.rec_rate),
            ("apply_noise", self.apply_noise),
            ("test_fraction", self.test_fraction),
        ];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        for (name, r) in [
            ("skills_per_user", self.skills_per_user),
            ("skills_per_job", self.skills_per_job),
        ] {
            if r.lo < 1 || r.lo > r.hi {
                return Err(Error::Config(format!(
                    "{name} must be a nonempty range starting at 1 or more"
                )));
            }
            if r.hi > self.n_skills {
                return Err(Error::Config(format!(
                    "{name} allows {} skills but only {} exist",
                    r.hi, self.n_skills
                )));
            }
        }
        let smallest_pool = self.n_skills / self.n_classes;
        let most_wanted = self.skills_per_user.hi.max(self.skills_per_job.hi);
        if self.class_affinity >= 1.0 && smallest_pool > 0 && smallest_pool < most_wanted {
            return Err(Error::Config(format!(
                "class_affinity=1 needs at least {most_wanted} skills per class, but a class pool has {smallest_pool}"
            )));
        }
        if !(1..=4).contains(&self.max_dist_bucket) {
            return Err(Error::Config(
                "max_dist_bucket must be between 1 and 4".into(),
            ));
        }
        if !(self.region_miles.is_finite() && self.region_miles > 0.0) {
            return Err(Error::Config("region_miles must be positive".into()));
        }
        if !(self.jitter_miles.is_finite() && self.jitter_miles >= 0.0) {
            return Err(Error::Config("jitter_miles must be nonnegative".into()));
        }
        if self.candidates_per_user > self.n_jobs {
            return Err(Error::Config("candidates_per_user exceeds n_jobs".into()));
        }
        Ok(())
    }

    /// `key=value` lines; `#` and `%` start comments. Missing keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw.split('#').next().unwrap_or("")).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<V: FromStr>(key: &str, value: &str) -> Result<V> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
        }
        macro_rules! assign {
            ($($f:ident),*) => {
                match key {
                    $(stringify!($f) => self.$f = parse(key, value)?,)*
                    other => return Err(Error::Config(format!("unknown synth key `{other}`"))),
                }
            };
        }
        synth_fields!(assign);
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($($f:ident),*) => {
                $(out.push_str(&format!("{}={}\n", stringify!($f), self.$f));)*
            };
        }
        synth_fields!(emit);
        out
    }
}

struct Entity {
    class: usize,
    city: usize,
    x: f64,
    y: f64,
    /// Sorted skill indices.
    skills: Vec<usize>,
}

fn draw_skills(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    range: CountRange,
    pool: &[usize],
) -> Vec<usize> {
    let k = rng.gen_range(range.range());
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    while chosen.len() < k {
        let s = if !pool.is_empty() && rng.gen_bool(cfg.class_affinity) {
            pool[rng.gen_range(0..pool.len())]
        } else {
            rng.gen_range(0..cfg.n_skills)
        };
        if !chosen.contains(&s) {
            chosen.push(s);
        }
    }
    chosen.sort_unstable();
    chosen
}

fn draw_entity(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    cities: &[(f64, f64)],
    pools: &[Vec<usize>],
    range: CountRange,
) -> Entity {
    let class = rng.gen_range(0..cfg.n_classes);
    let city = rng.gen_range(0..cfg.n_cities);
    let (cx, cy) = cities[city];
    let x = cx + rng.gen_range(-1.0..=1.0) * cfg.jitter_miles;
    let y = cy + rng.gen_range(-1.0..=1.0) * cfg.jitter_miles;
    let skills = draw_skills(rng, cfg, range, &pools[class]);
    Entity {
        class,
        city,
        x,
        y,
        skills,
    }
}

fn shared(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn bucket(u: &Entity, j: &Entity) -> u8 {
    let d = ((u.x - j.x).powi(2) + (u.y - j.y).powi(2)).sqrt();
    discretize_distance(d).expect("euclidean distance is nonnegative")
}

/// Ground truth of the planted rule, for tests and diagnostics.
pub struct PlantedWorld {
    users: Vec<Entity>,
    jobs: Vec<Entity>,
    cfg: SynthConfig,
}

impl PlantedWorld {
    pub fn is_match(&self, user: usize, job: usize) -> bool {
        let (u, j) = (&self.users[user], &self.jobs[job]);
        shared(&u.skills, &j.skills) >= self.cfg.min_shared_skills
            && bucket(u, j) <= self.cfg.max_dist_bucket
    }
}

/// Seeds the user split independently of the world stream.
const SPLIT_SALT: u64 = 0x5EED_5917_C0DE_0001;

struct Simulation {
    world: PlantedWorld,
    logs: Vec<UserLog>,
    /// Skills listed on each user's profile.
    visible: Vec<Vec<usize>>,
    companies: Vec<usize>,
    titles: Vec<usize>,
}

/// Per-user outcome of the recommendation simulation.
struct UserLog {
    recommended: Vec<usize>,
    applied: Vec<usize>,
}

/// Samples the world (cities, jobs, users) and the recommendation log.
fn simulate(cfg: &SynthConfig) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cities: Vec<(f64, f64)> = (0..cfg.n_cities)
        .map(|_| {
            (
                rng.gen_range(0.0..cfg.region_miles),
                rng.gen_range(0.0..cfg.region_miles),
            )
        })
        .collect();
    let pools: Vec<Vec<usize>> = (0..cfg.n_classes)
        .map(|c| {
            (0..cfg.n_skills)
                .filter(|s| s % cfg.n_classes == c)
                .collect()
        })
        .collect();
    let jobs: Vec<Entity> = (0..cfg.n_jobs)
        .map(|_| draw_entity(&mut rng, cfg, &cities, &pools, cfg.skills_per_job))
        .collect();
    let users: Vec<Entity> = (0..cfg.n_users)
        .map(|_| draw_entity(&mut rng, cfg, &cities, &pools, cfg.skills_per_user))
        .collect();
    let companies: Vec<usize> = (0..cfg.n_users)
        .map(|_| rng.gen_range(0..cfg.n_companies))
        .collect();
    let titles: Vec<usize> = users
        .iter()
        .map(|u| {
            let own: Vec<usize> = (0..cfg.n_titles)
                .filter(|t| t % cfg.n_classes == u.class)
                .collect();
            if own.is_empty() {
                rng.gen_range(0..cfg.n_titles)
            } else {
                own[rng.gen_range(0..own.len())]
            }
        })
        .collect();
    let visible: Vec<Vec<usize>> = users
        .iter()
        .map(|u| {
            u.skills
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(cfg.skill_visibility))
                .collect()
        })
        .collect();

    let mut jobs_by_class: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_classes];
    let mut jobs_by_skill: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_skills];
    for (i, j) in jobs.iter().enumerate() {
        jobs_by_class[j.class].push(i);
        for &s in &j.skills {
            jobs_by_skill[s].push(i);
        }
    }
    let open: Vec<bool> = (0..cfg.n_jobs)
        .map(|_| rng.gen_bool(cfg.open_fraction))
        .collect();
    let world = PlantedWorld {
        users,
        jobs,
        cfg: cfg.clone(),
    };
    let mut logs = Vec::with_capacity(cfg.n_users);
    let mut counts = vec![0usize; cfg.n_jobs];
    for ui in 0..cfg.n_users {
        let u = &world.users[ui];
        // Matching jobs, found through the skill index.
        let mut touched = Vec::new();
        for &s in &u.skills {
            for &j in jobs_by_skill[s].iter().filter(|&&j| open[j]) {
                if counts[j] == 0 {
                    touched.push(j);
                }
                counts[j] += 1;
            }
        }
        touched.sort_unstable();
        let matching: Vec<usize> = touched
            .iter()
            .copied()
            .filter(|&j| {
                counts[j] >= cfg.min_shared_skills
                    && bucket(u, &world.jobs[j]) <= cfg.max_dist_bucket
            })
            .collect();
        for &j in &touched {
            counts[j] = 0;
        }
        // The recommender proposes jobs overlapping the user's profile,
        // falling back to the user's class when nothing overlaps.
        let class_open: Vec<usize>;
        let pool = if touched.is_empty() {
            class_open = jobs_by_class[u.class]
                .iter()
                .copied()
                .filter(|&j| open[j])
                .collect();
            &class_open
        } else {
            &touched
        };
        let mut candidates: Vec<usize> = Vec::with_capacity(cfg.candidates_per_user);
        let mut attempts = 0;
        while candidates.len() < cfg.candidates_per_user
            && attempts < 50 * cfg.candidates_per_user.max(1)
        {
            attempts += 1;
            let pick = if !matching.is_empty() && rng.gen_bool(cfg.match_bias) {
                matching[rng.gen_range(0..matching.len())]
            } else if !pool.is_empty() {
                pool[rng.gen_range(0..pool.len())]
            } else {
                rng.gen_range(0..cfg.n_jobs)
            };
            if !candidates.contains(&pick) {
                candidates.push(pick);
            }
        }
        candidates.sort_unstable();
        let mut recommended = Vec::new();
        let mut applied = Vec::new();
        for j in candidates {
            if !rng.gen_bool(cfg.rec_rate) {
                continue;
            }
            recommended.push(j);
            if world.is_match(ui, j) && !rng.gen_bool(cfg.apply_noise) {
                applied.push(j);
            }
        }
        logs.push(UserLog {
            recommended,
            applied,
        });
    }
    Simulation {
        world,
        logs,
        visible,
        companies,
        titles,
    }
}

/// Generates a dataset split by user, reproducible from `cfg.seed`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<DatasetSplit> {
    synth_generate_with_truth(cfg).map(|(split, _)| split)
}

/// As [`synth_generate`], also returning the planted ground truth.
pub fn synth_generate_with_truth(cfg: &SynthConfig) -> Result<(DatasetSplit, PlantedWorld)> {
    cfg.validate()?;
    let Simulation {
        world,
        logs,
        visible,
        companies,
        titles,
    } = simulate(cfg);
    let mut order: Vec<usize> = (0..cfg.n_users).collect();
    let mut split_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SPLIT_SALT);
    order.shuffle(&mut split_rng);
    let n_test = ((cfg.n_users as f64) * cfg.test_fraction).round() as usize;
    let mut is_test = vec![false; cfg.n_users];
    for &u in &order[..n_test.min(cfg.n_users)] {
        is_test[u] = true;
    }

    let mut universe = Universe::new(rec_schema());
    let names = Names::intern(&mut universe, cfg)?;
    let s = universe.schema();
    let p = |name: &str| s.require_pred(name);
    let (job_skill, job_class) = (p("jobSkill")?, p("jobClass")?);
    let (user_skill, user_class, user_city) = (p("userSkill")?, p("userClass")?, p("userCity")?);
    let (company, title) = (p("mostRecentCompany")?, p("mostRecentJobTitle")?);
    let (applied, recommended, dis) = (p("prAppliedJob")?, p("recommended")?, p("userJobDis")?);

    let mut sides = [FactBase::new(&universe), FactBase::new(&universe)];
    for side in sides.iter_mut() {
        for (ji, j) in world.jobs.iter().enumerate() {
            for &sk in &j.skills {
                side.add_fact(
                    &universe,
                    &GroundAtom::new(job_skill, vec![names.jobs[ji], names.skills[sk]]),
                )?;
            }
            side.add_fact(
                &universe,
                &GroundAtom::new(job_class, vec![names.jobs[ji], names.classes[j.class]]),
            )?;
        }
    }
    for (ui, u) in world.users.iter().enumerate() {
        let side = &mut sides[is_test[ui] as usize];
        let un = names.users[ui];
        let mut add =
            |pred, args: Vec<ConstId>| side.add_fact(&universe, &GroundAtom::new(pred, args));
        for &sk in &visible[ui] {
            add(user_skill, vec![un, names.skills[sk]])?;
        }
        add(user_class, vec![un, names.classes[u.class]])?;
        add(user_city, vec![un, names.cities[u.city]])?;
        add(company, vec![un, names.companies[companies[ui]]])?;
        add(title, vec![un, names.titles[titles[ui]]])?;
        for &j in &logs[ui].recommended {
            add(recommended, vec![un, names.jobs[j]])?;
            let b = bucket(u, &world.jobs[j]) as usize;
            add(dis, vec![un, names.jobs[j], names.buckets[b - 1]])?;
        }
        for &j in &logs[ui].applied {
            add(applied, vec![un, names.jobs[j]])?;
        }
    }
    let [train, test] = sides;
    let mut fb_train = induce_comm(&train, &universe)?;
    let mut fb_test = induce_comm(&test, &universe)?;
    fb_train.freeze();
    fb_test.freeze();
    let (train_pos, train_neg) = build_examples(&fb_train, &universe)?;
    let (test_pos, test_neg) = build_examples(&fb_test, &universe)?;
    let split = DatasetSplit {
        universe,
        fb_train,
        fb_test,
        train_pos,
        train_neg,
        test_pos,
        test_neg,
    };
    Ok((split, world))
}

struct Names {
    users: Vec<ConstId>,
    jobs: Vec<ConstId>,
    skills: Vec<ConstId>,
    classes: Vec<ConstId>,
    cities: Vec<ConstId>,
    companies: Vec<ConstId>,
    titles: Vec<ConstId>,
    buckets: Vec<ConstId>,
}

impl Names {
    fn intern(u: &mut Universe, cfg: &SynthConfig) -> Result<Self> {
        let mut many = |prefix: &str, ty: &str, n: usize| -> Result<Vec<ConstId>> {
            (0..n)
                .map(|i| u.intern_typed(&format!("{prefix}{i}"), ty))
                .collect()
        };
        Ok(Self {
            users: many("u", "user", cfg.n_users)?,
            jobs: many("j", "job", cfg.n_jobs)?,
            skills: many("s", "skill", cfg.n_skills)?,
            classes: many("c", "class", cfg.n_classes)?,
            cities: many("city", "city", cfg.n_cities)?,
            companies: many("co", "company", cfg.n_companies)?,
            titles: many("t", "title", cfg.n_titles)?,
            buckets: DIST_BUCKETS
                .iter()
                .map(|b| u.intern_typed(b, "distbucket"))
                .collect::<Result<_>>()?,
        })
    }
}

/// Planted truth for a generated example, `None` for foreign constants.
pub fn truth_of(world: &PlantedWorld, universe: &Universe, ex: &LabeledExample) -> Option<bool> {
    let user = universe
        .const_name(ex.target.args[0])
        .strip_prefix('u')?
        .parse()
        .ok()?;
    let job = universe
        .const_name(ex.target.args[1])
        .strip_prefix('j')?
        .parse()
        .ok()?;
    Some(world.is_match(user, job))
}
