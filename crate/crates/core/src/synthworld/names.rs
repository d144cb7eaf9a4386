//! Built-in name pools and the name perturbations that defeat string matching.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PersonName {
    pub given: String,
    pub family: String,
}

impl PersonName {
    pub fn new(given: &str, family: &str) -> Self {
        PersonName { given: given.to_string(), family: family.to_string() }
    }
}

impl fmt::Display for PersonName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.given, self.family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// The ORCID profile carries a different family name.
    MarriedName,
    /// The author publishes with a one- or two-letter given name.
    ShortName,
    /// The ORCID profile uses a native-script name; papers use the
    /// anglicised form.
    Transliteration,
}

impl Perturbation {
    pub const ALL: [Perturbation; 4] =
        [Perturbation::None, Perturbation::MarriedName, Perturbation::ShortName, Perturbation::Transliteration];

    pub fn as_str(self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::MarriedName => "married_name",
            Perturbation::ShortName => "short_name",
            Perturbation::Transliteration => "transliteration",
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const GIVEN_NAMES: &[&str] = &[
    "Abebe", "Adaeze", "Agnieszka", "Aiko", "Alejandro", "Alessandra", "Amara", "Anders", "Ansel", "Astrid",
    "Bartholomew", "Beatriz", "Bogdan", "Caoimhe", "Chidi", "Cosmin", "Dagny", "Dmitar", "Ebere", "Efua",
    "Eoghan", "Esperanza", "Folasade", "Fredrik", "Gautam", "Giedre", "Gwendolyn", "Halvard", "Hamza", "Henrike",
    "Ignatius", "Ilsabet", "Imogen", "Ingvild", "Ivory", "Jadwiga", "Jaroslav", "Joaquim", "Jorunn", "Kalinda",
    "Kasimir", "Keziah", "Kofi", "Kwabena", "Leocadia", "Ludovic", "Lyudmila", "Macarena", "Mbali", "Meinrad",
    "Mirela", "Mpho", "Nadezhda", "Nkechi", "Nuno", "Obadiah", "Odalys", "Olufemi", "Oswaldo", "Pavlina",
    "Philippa", "Quirijn", "Radomir", "Reinhold", "Rhiannon", "Rosalind", "Rustam", "Saoirse", "Segun", "Siobhan",
    "Sofronio", "Sunniva", "Svetozar", "Tadeusz", "Takumi", "Thandiwe", "Theodora", "Tobias", "Ulrike", "Upendra",
    "Valdemar", "Venkatesh", "Wilhelmina", "Wojciech", "Xiomara", "Yaroslava", "Yevgeny", "Zbigniew", "Zainab", "Zoltan",
];

pub const FAMILY_NAMES: &[&str] = &[
    "Abernethy", "Achterberg", "Adeyemi", "Andrianarivo", "Bakshi", "Balasubramanian", "Bartkowiak", "Bjornstad",
    "Blomqvist", "Brzezinski", "Castellanos", "Chakraborty", "Chukwuemeka", "Cvetkovic", "Dabrowski", "Delacroix",
    "Dimitrov", "Domingues", "Duchovny", "Eberhardt", "Ekwueme", "Escobedo", "Fairweather", "Fitzgerald",
    "Fonseca", "Fukuyama", "Gallagher", "Gudmundsdottir", "Gyllenhaal", "Hadjipavlou", "Halvorsen", "Hernandez",
    "Hoogendoorn", "Ibrahimovic", "Iwasaki", "Jablonski", "Jovanovic", "Kaczmarek", "Kapoor", "Karlsson",
    "Kiplagat", "Knutsdottir", "Kowalczyk", "Krishnamurthy", "Kuznetsova", "Lachowicz", "Lindqvist", "Lombardo",
    "Machado", "Mahlangu", "Marchetti", "Mbeki", "McAllister", "Mendonca", "Minkowski", "Mukherjee",
    "Nakashima", "Nascimento", "Ndlovu", "Nieuwenhuis", "Novotny", "Nwachukwu", "Obradovic", "Okonkwo",
    "Olszewski", "Ostrowski", "Pacheco", "Papadakis", "Pellegrini", "Piotrowski", "Quaranta", "Radcliffe",
    "Rasmussen", "Rautenbach", "Rodrigues", "Rosenthal", "Rutkowski", "Sandoval", "Schwarzenegger", "Sebastiani",
    "Shevchenko", "Sigurdsson", "Sokolowski", "Strzelecki", "Szymanski", "Takahashi", "Thorvaldsen", "Tkachenko",
    "Uchenna", "Urquhart", "Valenzuela", "Vasquez", "Vogelsang", "Wachowski", "Wasilewski", "Whitfield",
    "Wojcik", "Xenakis", "Yamaguchi", "Yevtushenko", "Zabrowski", "Zamfirescu", "Zielinski", "Zuberbuhler",
];

/// Groups of names that score high against each other.
pub const CONFUSABLE_CLUSTERS: &[&[(&str, &str)]] = &[
    &[("Jon", "Smith"), ("John", "Smith"), ("Jon", "Smyth")],
    &[("Li", "Wei"), ("Li", "Wen"), ("Lei", "Wei")],
    &[("Ana", "Silva"), ("Anna", "Silva"), ("Ana", "Silvia")],
    &[("Maria", "Santos"), ("Mario", "Santos"), ("Maria", "Santo")],
    &[("Kim", "Lee"), ("Kim", "Li"), ("Kin", "Lee")],
];

/// Anglicised name (as published) paired with the native-script form used in
/// an ORCID profile: (given, family, native given, native family).
pub const TRANSLITERATIONS: &[(&str, &str, &str, &str)] = &[
    ("Fang", "Wang", "芳", "王"),
    ("Wei", "Zhang", "伟", "张"),
    ("Jing", "Liu", "静", "刘"),
    ("Hui", "Chen", "辉", "陈"),
    ("Xiuying", "Huang", "秀英", "黄"),
    ("Oleg", "Ivanov", "Олег", "Иванов"),
    ("Dmitri", "Sokolov", "Дмитрий", "Соколов"),
    ("Svetlana", "Popova", "Светлана", "Попова"),
    ("Nikolai", "Petrov", "Николай", "Петров"),
    ("Dimitris", "Papadopoulos", "Δημήτρης", "Παπαδόπουλος"),
    ("Eleni", "Georgiou", "Ελένη", "Γεωργίου"),
    ("Yuki", "Tanaka", "由紀", "田中"),
    ("Hiroshi", "Suzuki", "博", "鈴木"),
    ("Jiwoo", "Kim", "지우", "김"),
    ("Minjun", "Park", "민준", "박"),
    ("Ahmed", "Hassan", "أحمد", "حسن"),
    ("Fatima", "Khalil", "فاطمة", "خليل"),
    ("Priya", "Sharma", "प्रिया", "शर्मा"),
    ("Arjun", "Patel", "अर्जुन", "पटेल"),
    ("Yosef", "Cohen", "יוסף", "כהן"),
    ("Somchai", "Wongsa", "สมชาย", "วงศ์สา"),
    ("Reza", "Rahimi", "رضا", "رحیمی"),
];

/// Random anglicised/native pair from [`TRANSLITERATIONS`].
pub fn transliteration_pair<R: Rng + ?Sized>(rng: &mut R) -> (PersonName, PersonName) {
    let (g, f, ng, nf) = *TRANSLITERATIONS.choose(rng).expect("table is nonempty");
    (PersonName::new(g, f), PersonName::new(ng, nf))
}

/// Produces the variant of `name` that a perturbation of `kind` yields.
///
/// `MarriedName` swaps in a different family name from the pool,
/// `ShortName` truncates the given name to its first one or two
/// characters, and `Transliteration` returns the native-script form when
/// `name` is an anglicised table entry (otherwise a random native entry).
pub fn perturb_name<R: Rng + ?Sized>(name: &PersonName, kind: Perturbation, rng: &mut R) -> PersonName {
    match kind {
        Perturbation::None => name.clone(),
        Perturbation::MarriedName => loop {
            let family = *FAMILY_NAMES.choose(rng).expect("pool is nonempty");
            if !family.eq_ignore_ascii_case(&name.family) {
                break PersonName::new(&name.given, family);
            }
        },
        Perturbation::ShortName => {
            let keep = rng.random_range(1..=2usize);
            PersonName { given: name.given.chars().take(keep).collect(), family: name.family.clone() }
        }
        Perturbation::Transliteration => TRANSLITERATIONS
            .iter()
            .find(|(g, f, _, _)| g.eq_ignore_ascii_case(&name.given) && f.eq_ignore_ascii_case(&name.family))
            .map(|&(_, _, ng, nf)| PersonName::new(ng, nf))
            .unwrap_or_else(|| transliteration_pair(rng).1),
    }
}
