//! Seeded synthetic corpora with known authorship, ORCID ownership and
//! injected shuffles, for evaluating the reconciliation pipeline.
//!
//! Each entity class draws from its own ChaCha stream derived from the seed,
//! so growing one class (say, more papers) leaves the others unchanged.

mod config;
pub mod names;
mod score;
mod truth;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{AuthorsPerPaper, ConfigError, PerturbationRates, SynthConfig};
pub use names::{perturb_name, transliteration_pair, PersonName, Perturbation};
pub use score::{score_repair, ClassScore, RepairScore, ReportEntry};
pub use truth::{AssertionSync, GroundTruth, InjectedShuffle, TrueAuthorship, TrueResearcher};

use crate::ingest::{
    write_ndjson, AuthorMention, CountryCode, CrossrefAssertion, Doi, ForCode, InputPaths, OrcidId, OrcidProfile,
    PublicationRecord, ResearcherId, ResearcherRecord,
};
use crate::names::full_name;
use crate::quality::levenshtein_ratio;

const STREAM_RESEARCHERS: u64 = 1;
const STREAM_IDENTITIES: u64 = 2;
const STREAM_PAPERS: u64 = 3;
const STREAM_ASSERTIONS: u64 = 4;
const STREAM_SHUFFLES: u64 = 5;
const STREAM_VENUES: u64 = 6;
const STREAM_PROFILES: u64 = 7;

/// First year an ORCID iD can have been created.
const ORCID_LAUNCH_YEAR: i32 = 2012;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A generated corpus: the four ingest tables, the income band map and the
/// ground truth behind them.
#[derive(Debug, Clone)]
pub struct World {
    pub config: SynthConfig,
    pub publications: Vec<PublicationRecord>,
    pub assertions: Vec<CrossrefAssertion>,
    pub profiles: Vec<OrcidProfile>,
    pub researchers: Vec<ResearcherRecord>,
    /// (country, band) rows.
    pub income_bands: Vec<(String, String)>,
    pub truth: GroundTruth,
}

/// Paths written by [`World::write`].
#[derive(Debug, Clone)]
pub struct WorldFiles {
    pub inputs: InputPaths,
    pub income_bands: PathBuf,
    pub truth: PathBuf,
}

impl World {
    pub fn write(&self, dir: &Path) -> io::Result<WorldFiles> {
        fs::create_dir_all(dir)?;
        let inputs = InputPaths::in_dir(dir);
        let create = |p: &Path| File::create(p).map(|f| BufWriter::with_capacity(1 << 20, f));
        write_ndjson(&self.publications, create(&inputs.publications)?)?;
        write_ndjson(&self.assertions, create(&inputs.crossref_assertions)?)?;
        write_ndjson(&self.profiles, create(&inputs.orcid_profiles)?)?;
        write_ndjson(&self.researchers, create(&inputs.researchers)?)?;

        let income_bands = dir.join("income_bands.csv");
        let mut w = csv::Writer::from_writer(create(&income_bands)?);
        w.write_record(["country", "band"])?;
        for (c, b) in &self.income_bands {
            w.write_record([c, b])?;
        }
        w.flush()?;

        let truth = dir.join("truth.ndjson");
        self.truth.write_ndjson(create(&truth)?)?;
        Ok(WorldFiles { inputs, income_bands, truth })
    }
}

struct Person {
    id: ResearcherId,
    published: PersonName,
    profile: PersonName,
    country: CountryCode,
    funders: BTreeSet<String>,
    productivity: f64,
    career_start: i32,
    perturbation: Perturbation,
    orcid: Option<OrcidId>,
    created: Option<NaiveDate>,
    covered: bool,
    synced: bool,
}

fn weighted_keys(map: &std::collections::BTreeMap<String, f64>) -> (Vec<&str>, WeightedIndex<f64>) {
    let keys: Vec<&str> = map.keys().map(String::as_str).collect();
    let dist = WeightedIndex::new(map.values().copied()).expect("weights validated");
    (keys, dist)
}

fn random_date<R: Rng>(rng: &mut R, year: i32) -> NaiveDate {
    let first = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let days = if NaiveDate::from_ymd_opt(year, 2, 29).is_some() { 366 } else { 365 };
    first + chrono::Days::new(rng.random_range(0..days))
}

fn draw_people(config: &SynthConfig) -> Vec<Person> {
    let mut rng = stream(config.seed, STREAM_RESEARCHERS);
    let (countries, country_dist) = weighted_keys(&config.countries);
    let combos = names::GIVEN_NAMES.len() * names::FAMILY_NAMES.len();
    let mut used: HashSet<(usize, usize)> = HashSet::new();

    let mut people = Vec::with_capacity(config.n_researchers);
    for i in 0..config.n_researchers {
        let name = if rng.random_bool(config.confusable_rate) {
            let cluster = names::CONFUSABLE_CLUSTERS.choose(&mut rng).expect("nonempty");
            let (g, f) = *cluster.choose(&mut rng).expect("nonempty");
            PersonName::new(g, f)
        } else {
            let mut pick = (0, 0);
            for _ in 0..32 {
                pick = (rng.random_range(0..names::GIVEN_NAMES.len()), rng.random_range(0..names::FAMILY_NAMES.len()));
                if used.len() >= combos || !used.contains(&pick) {
                    break;
                }
            }
            used.insert(pick);
            PersonName::new(names::GIVEN_NAMES[pick.0], names::FAMILY_NAMES[pick.1])
        };
        let country = CountryCode::parse(countries[country_dist.sample(&mut rng)]).expect("validated");
        let mut funders = BTreeSet::new();
        if config.n_funders > 0 {
            for _ in 0..rng.random_range(0..=2) {
                funders.insert(format!("fund-{:03}", rng.random_range(0..config.n_funders)));
            }
        }
        // Heavy-tailed productivity with a floor so nobody is inactive.
        let productivity = 0.5 - (1.0 - rng.random::<f64>()).ln();
        let career_start = rng.random_range(config.first_year - 5..=(config.last_year - 2).max(config.first_year));
        people.push(Person {
            id: ResearcherId::new(&format!("dim-{i:07}")),
            profile: name.clone(),
            published: name,
            country,
            funders,
            productivity,
            career_start,
            perturbation: Perturbation::None,
            orcid: None,
            created: None,
            covered: false,
            synced: false,
        });
    }

    let mut rng = stream(config.seed, STREAM_IDENTITIES);
    let p = &config.name_perturbation;
    let first_created = ORCID_LAUNCH_YEAR.max(config.first_year);
    for (i, person) in people.iter_mut().enumerate() {
        let u: f64 = rng.random();
        person.perturbation = if u < p.married_name {
            Perturbation::MarriedName
        } else if u < p.married_name + p.short_name {
            Perturbation::ShortName
        } else if u < p.married_name + p.short_name + p.transliteration {
            Perturbation::Transliteration
        } else {
            Perturbation::None
        };
        let owner = rng.random_bool(config.orcid_ownership_rate);
        person.covered = rng.random_bool(config.registry_coverage);
        let synced = rng.random_bool(config.sync_probability);
        let created_year = rng.random_range(first_created.min(config.last_year)..=config.last_year);
        let created = random_date(&mut rng, created_year);
        match person.perturbation {
            Perturbation::None => {}
            Perturbation::MarriedName => person.profile = perturb_name(&person.published, Perturbation::MarriedName, &mut rng),
            Perturbation::ShortName => person.published = perturb_name(&person.published, Perturbation::ShortName, &mut rng),
            Perturbation::Transliteration => {
                let (anglicised, native) = transliteration_pair(&mut rng);
                person.published = anglicised;
                person.profile = native;
            }
        }
        if owner {
            person.orcid = Some(OrcidId::from_base_number(1_000_000_000 + i as u64));
            person.created = Some(created);
            person.synced = synced;
        }
    }
    people
}

struct Venues {
    publisher_ids: Vec<String>,
    /// First year each publisher passes ORCID iDs to Crossref.
    publisher_start: Vec<i32>,
    journal_ids: Vec<String>,
    journal_publisher: Vec<usize>,
}

fn draw_venues(config: &SynthConfig) -> Venues {
    let mut rng = stream(config.seed, STREAM_VENUES);
    let latest_start = ORCID_LAUNCH_YEAR.clamp(config.first_year, config.last_year);
    let publisher_start = (0..config.n_publishers).map(|_| rng.random_range(config.first_year..=latest_start)).collect();
    let journal_publisher: Vec<usize> = (0..config.n_journals)
        .map(|j| if j < config.n_publishers { j } else { rng.random_range(0..config.n_publishers) })
        .collect();
    Venues {
        publisher_ids: (0..config.n_publishers).map(|p| format!("pub-{p:03}")).collect(),
        publisher_start,
        journal_ids: (0..config.n_journals).map(|j| format!("jnl-{j:04}")).collect(),
        journal_publisher,
    }
}

struct Paper {
    doi: Doi,
    year: i32,
    journal: usize,
    for_codes: BTreeSet<ForCode>,
    authors: Vec<usize>,
}

fn draw_papers(config: &SynthConfig, people: &[Person], venues: &Venues) -> Vec<Paper> {
    let mut rng = stream(config.seed, STREAM_PAPERS);
    let (codes, code_dist) = weighted_keys(&config.for_code_weights);
    let codes: Vec<ForCode> = codes.iter().map(|c| ForCode::parse(c).expect("validated")).collect();
    let normalized: Vec<String> = people.iter().map(|p| full_name(&p.published.given, &p.published.family)).collect();

    let mut active: HashMap<i32, (Vec<usize>, WeightedIndex<f64>)> = HashMap::new();
    for year in config.first_year..=config.last_year {
        let ids: Vec<usize> = (0..people.len()).filter(|&i| people[i].career_start <= year).collect();
        let ids = if ids.is_empty() { (0..people.len()).collect() } else { ids };
        let dist = WeightedIndex::new(ids.iter().map(|&i| people[i].productivity)).expect("positive weights");
        active.insert(year, (ids, dist));
    }

    let app = config.authors_per_paper;
    let spread = app.max - app.min;
    let p_extra = if spread == 0 { 0.0 } else { (app.mean - app.min as f64) / spread as f64 };
    let mut papers = Vec::with_capacity(config.n_papers);
    for k in 0..config.n_papers {
        let year = rng.random_range(config.first_year..=config.last_year);
        let journal = rng.random_range(0..config.n_journals);
        let mut for_codes = BTreeSet::new();
        for_codes.insert(codes[code_dist.sample(&mut rng)]);
        if rng.random_bool(0.5) {
            for_codes.insert(codes[code_dist.sample(&mut rng)]);
        }
        let extra = (0..spread).filter(|_| rng.random_bool(p_extra)).count();
        let (pool, dist) = &active[&year];
        let want = (app.min + extra).min(pool.len());

        let mut authors: Vec<usize> = Vec::with_capacity(want);
        let mut attempts = 0;
        while authors.len() < want && attempts < 200 {
            attempts += 1;
            let candidate = pool[dist.sample(&mut rng)];
            if authors.contains(&candidate) {
                continue;
            }
            if let Some(limit) = config.max_coauthor_name_ratio {
                let close = authors
                    .iter()
                    .any(|&a| levenshtein_ratio(&normalized[a], &normalized[candidate]) >= limit);
                if close {
                    continue;
                }
            }
            authors.push(candidate);
        }
        let publisher = venues.journal_publisher[journal];
        let doi = Doi::parse(&format!("10.{}/synth.{k:08}", 5000 + publisher)).expect("well-formed");
        papers.push(Paper { doi, year, journal, for_codes, authors });
    }
    papers.sort_by(|a, b| a.doi.cmp(&b.doi));
    papers
}

/// Moves a random share of assertions to another author on the same paper.
///
/// Only free positions (those without an assertion) are candidate targets,
/// so an assertion on a paper whose other positions are all asserted is never
/// selected. `assertions` must be sorted by `(doi, position)`; the result
/// stays sorted.
pub fn inject_shuffles<R: Rng>(
    assertions: &mut [CrossrefAssertion],
    author_counts: &HashMap<Doi, u32>,
    rate: f64,
    rng: &mut R,
) -> Vec<InjectedShuffle> {
    let mut shuffles = Vec::new();
    if rate <= 0.0 {
        return shuffles;
    }
    let mut start = 0;
    while start < assertions.len() {
        let doi = assertions[start].doi.clone();
        let end = start + assertions[start..].iter().take_while(|a| a.doi == doi).count();
        let n = author_counts.get(&doi).copied().unwrap_or(0);
        let group = &mut assertions[start..end];
        let mut occupied: BTreeSet<u32> = group.iter().map(|a| a.author_position).collect();
        for a in group.iter_mut() {
            let free: Vec<u32> = (0..n).filter(|p| !occupied.contains(p)).collect();
            if free.is_empty() || !rng.random_bool(rate) {
                continue;
            }
            let to = *free.choose(rng).expect("nonempty");
            occupied.remove(&a.author_position);
            occupied.insert(to);
            shuffles.push(InjectedShuffle { doi: doi.clone(), orcid: a.orcid, true_position: a.author_position, wrong_position: to });
            a.author_position = to;
        }
        group.sort_by_key(|a| a.author_position);
        start = end;
    }
    shuffles
}

/// Builds a world from `config`. Identical configs give identical worlds.
pub fn generate_world(config: &SynthConfig) -> Result<World, ConfigError> {
    config.validate()?;
    let people = draw_people(config);
    let venues = draw_venues(config);
    let papers = draw_papers(config, &people, &venues);

    let mut rng = stream(config.seed, STREAM_ASSERTIONS);
    let mut assertions = Vec::new();
    for paper in &papers {
        let publisher = venues.journal_publisher[paper.journal];
        let supported = paper.year >= venues.publisher_start[publisher];
        for (pos, &who) in paper.authors.iter().enumerate() {
            let person = &people[who];
            let (Some(orcid), Some(created)) = (person.orcid, person.created) else { continue };
            let asserted = rng.random_bool(config.assertion_rate);
            let authenticated = rng.random_bool(config.authenticated_rate);
            if supported && asserted && chrono::Datelike::year(&created) <= paper.year {
                assertions.push(CrossrefAssertion { doi: paper.doi.clone(), author_position: pos as u32, orcid, authenticated });
            }
        }
    }

    let author_counts: HashMap<Doi, u32> = papers.iter().map(|p| (p.doi.clone(), p.authors.len() as u32)).collect();
    let mut rng = stream(config.seed, STREAM_SHUFFLES);
    let shuffles = inject_shuffles(&mut assertions, &author_counts, config.shuffle_rate, &mut rng);

    let mut papers_of: Vec<Vec<usize>> = vec![Vec::new(); people.len()];
    for (k, paper) in papers.iter().enumerate() {
        for &who in &paper.authors {
            papers_of[who].push(k);
        }
    }
    let owner_index: HashMap<OrcidId, usize> =
        people.iter().enumerate().filter_map(|(i, p)| p.orcid.map(|o| (o, i))).collect();
    let mut asserted_dois: Vec<BTreeSet<Doi>> = vec![BTreeSet::new(); people.len()];
    for a in &assertions {
        asserted_dois[owner_index[&a.orcid]].insert(a.doi.clone());
    }

    let mut rng = stream(config.seed, STREAM_PROFILES);
    let mut profiles = Vec::new();
    for (i, person) in people.iter().enumerate() {
        let (Some(orcid), Some(created)) = (person.orcid, person.created) else { continue };
        let mut work_dois = if person.synced { asserted_dois[i].clone() } else { BTreeSet::new() };
        for &k in &papers_of[i] {
            let curated = rng.random_bool(config.self_curation_rate);
            if curated && !asserted_dois[i].contains(&papers[k].doi) {
                work_dois.insert(papers[k].doi.clone());
            }
        }
        profiles.push(OrcidProfile {
            orcid,
            given: person.profile.given.clone(),
            family: person.profile.family.clone(),
            created,
            work_dois,
        });
    }
    profiles.sort_by_key(|p| p.orcid);

    let researchers: Vec<ResearcherRecord> = people
        .iter()
        .enumerate()
        .filter(|(_, p)| p.covered)
        .map(|(i, p)| ResearcherRecord {
            researcher_id: p.id.clone(),
            given: p.published.given.clone(),
            family: p.published.family.clone(),
            country: p.country,
            orcid: p.orcid,
            publication_dois: papers_of[i].iter().map(|&k| papers[k].doi.clone()).collect(),
            funder_ids: p.funders.clone(),
        })
        .collect();

    let publications: Vec<PublicationRecord> = papers
        .iter()
        .map(|paper| PublicationRecord {
            doi: paper.doi.clone(),
            year: paper.year,
            journal_id: venues.journal_ids[paper.journal].clone(),
            publisher_id: venues.publisher_ids[venues.journal_publisher[paper.journal]].clone(),
            for_codes: paper.for_codes.clone(),
            authors: paper
                .authors
                .iter()
                .enumerate()
                .map(|(pos, &who)| AuthorMention {
                    position: pos as u32,
                    given: people[who].published.given.clone(),
                    family: people[who].published.family.clone(),
                })
                .collect(),
        })
        .collect();

    let truth = GroundTruth {
        researchers: people
            .iter()
            .map(|p| TrueResearcher {
                researcher_id: p.id.clone(),
                published: p.published.clone(),
                profile: p.orcid.map(|_| p.profile.clone()),
                orcid: p.orcid,
                country: p.country,
                covered: p.covered,
                perturbation: p.perturbation,
                synced: p.synced,
            })
            .collect(),
        authorships: papers
            .iter()
            .flat_map(|paper| {
                paper.authors.iter().enumerate().map(|(pos, &who)| TrueAuthorship {
                    doi: paper.doi.clone(),
                    position: pos as u32,
                    researcher_id: people[who].id.clone(),
                })
            })
            .collect(),
        shuffles,
        sync: assertions
            .iter()
            .map(|a| AssertionSync {
                doi: a.doi.clone(),
                position: a.author_position,
                orcid: a.orcid,
                synced: people[owner_index[&a.orcid]].synced,
            })
            .collect(),
    };

    log::info!(
        "synthworld seed {}: {} papers, {} researchers ({} in registry), {} assertions, {} shuffles",
        config.seed,
        publications.len(),
        people.len(),
        researchers.len(),
        assertions.len(),
        truth.shuffles.len()
    );
    Ok(World {
        config: config.clone(),
        publications,
        assertions,
        profiles,
        researchers,
        income_bands: config.income_bands.iter().map(|(c, b)| (c.clone(), b.clone())).collect(),
        truth,
    })
}
