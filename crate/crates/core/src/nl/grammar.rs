//! Sentence and clause tables shared by the renderer and the parser.
//!
//! A template is plain text with typed slots. Rendering substitutes values;
//! parsing compiles the same text into an anchored regex, so every variant
//! the renderer can emit is one the parser accepts.

use std::sync::LazyLock;

use regex::Regex;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Clause {
    PriceTotalMax,
    Cabin,
    Refundable(bool),
    Nonstop(bool),
    NoBasicEconomy(bool),
    NoMixedCabin(bool),
    /// Both `must_not_basic_economy` and `no_mixed_cabin` true.
    NoBasicNoMixed,
    AvoidRedEye(bool),
    DepartureWindow,
    ArrivalWindow,
    PlaneTypes,
    Airlines,
    HotelDaily,
    HotelTotal,
    MinRating,
    Brands,
    TripTotal,
    Everyday,
    Leg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Section {
    Airline,
    Hotel,
    Budget,
    Legs,
}

pub(crate) const OPENERS: [&str; 4] = [
    "Embark on a thrilling journey with these requirements.",
    "Please plan a trip for me.",
    "I need help booking some travel.",
    "Here is what I am looking for.",
];

pub(crate) const CLOSERS: [&str; 4] = [
    "The adventure awaits!",
    "Thanks in advance.",
    "Looking forward to it!",
    "I appreciate the help.",
];

pub(crate) fn headers(section: Section) -> &'static [&'static str] {
    match section {
        Section::Airline => &[
            "Flights: ",
            "Flight preferences: ",
            "For flights: ",
            "Airline requirements: ",
        ],
        Section::Hotel => &[
            "Hotels: ",
            "Hotel preferences: ",
            "For hotels: ",
            "Lodging requirements: ",
        ],
        Section::Budget => &[
            "Budget: ",
            "Overall budget: ",
            "For the whole trip: ",
            "Spending limits: ",
        ],
        Section::Legs => &["Travel dates: ", "Itinerary: ", "Route: ", "Schedule: "],
    }
}

/// Clause templates per section. Slots: `{money}`, `{cabin}`, `{t1}`,
/// `{t2}`, `{rating}`, `{list}`, `{date}`, `{from}`, `{to}`.
pub(crate) fn templates(clause: Clause) -> &'static [&'static str] {
    use Clause::*;
    match clause {
        PriceTotalMax => &[
            "with a total budget of {money}",
            "flights under {money} in total",
            "a flight budget of {money}",
            "spending at most {money} on airfare",
        ],
        Cabin => &[
            "{cabin} class",
            "in {cabin}",
            "{cabin} cabin",
            "flying {cabin}",
        ],
        Refundable(true) => &[
            "refundable",
            "refundable tickets only",
            "tickets must be refundable",
            "only refundable fares",
        ],
        Refundable(false) => &[
            "non-refundable is fine",
            "refundability not required",
            "refundable or not",
            "any fare whether refundable or not",
        ],
        Nonstop(true) => &[
            "non-stop",
            "nonstop flights only",
            "direct flights",
            "no layovers",
        ],
        Nonstop(false) => &[
            "connections are fine",
            "layovers allowed",
            "stops are okay",
            "non-stop not required",
        ],
        NoBasicEconomy(true) => &[
            "no basic economy",
            "basic economy excluded",
            "avoid basic economy fares",
            "never basic economy",
        ],
        NoBasicEconomy(false) => &[
            "basic economy is fine",
            "basic economy allowed",
            "basic economy okay",
            "basic economy acceptable",
        ],
        NoMixedCabin(true) => &[
            "no mixed cabin",
            "single cabin only",
            "mixed cabin excluded",
            "avoid mixed cabin itineraries",
        ],
        NoMixedCabin(false) => &[
            "mixed cabin is fine",
            "mixed cabin allowed",
            "mixed cabin okay",
            "mixed cabin acceptable",
        ],
        NoBasicNoMixed => &[
            "no basic economy or mixed cabin",
            "neither basic economy nor mixed cabin",
            "no basic economy and no mixed cabin",
            "avoid basic economy and mixed cabin fares",
        ],
        AvoidRedEye(true) => &[
            "no red-eye flights",
            "avoid red-eyes",
            "no overnight red-eye departures",
            "red-eye flights excluded",
        ],
        AvoidRedEye(false) => &[
            "red-eye flights are fine",
            "red-eyes allowed",
            "red-eye okay",
            "overnight departures acceptable",
        ],
        DepartureWindow => &[
            "departing between {t1} and {t2}",
            "leaving from {t1} to {t2}",
            "departures {t1}-{t2}",
            "taking off between {t1} and {t2}",
        ],
        ArrivalWindow => &[
            "arriving between {t1} and {t2}",
            "landing from {t1} to {t2}",
            "arrivals {t1}-{t2}",
            "getting in between {t1} and {t2}",
        ],
        PlaneTypes => &[
            "on {list} aircraft",
            "plane type {list}",
            "flying a {list}",
            "aircraft limited to {list}",
        ],
        Airlines => &[
            "preferred airlines {list}",
            "flying with {list}",
            "airlines {list} only",
            "booked on {list}",
        ],
        HotelDaily => &[
            "daily budget {money}",
            "at most {money} per night",
            "nightly rate under {money}",
            "{money} a night max",
        ],
        HotelTotal => &[
            "total budget {money}",
            "{money} total for lodging",
            "hotel spend capped at {money}",
            "no more than {money} overall",
        ],
        MinRating => &[
            "rated {rating} or higher",
            "at least {rating} stars",
            "minimum rating {rating}",
            "{rating}+ stars",
        ],
        Brands => &[
            "brands {list}",
            "{list} properties",
            "staying at {list}",
            "brand limited to {list}",
        ],
        TripTotal => &[
            "total budget {money}",
            "{money} for the whole trip",
            "overall cap of {money}",
            "spend no more than {money} in total",
        ],
        Everyday => &[
            "everyday budget {money}",
            "{money} per day",
            "daily spending under {money}",
            "at most {money} each day",
        ],
        Leg => &[
            "{date}, {from} to {to}",
            "{from} to {to} on {date}",
            "from {from} to {to} on {date}",
            "{date} from {from} to {to}",
        ],
    }
}

pub(crate) fn clauses(section: Section) -> &'static [Clause] {
    use Clause::*;
    match section {
        Section::Airline => &[
            PriceTotalMax,
            Cabin,
            Refundable(true),
            Refundable(false),
            Nonstop(true),
            Nonstop(false),
            NoBasicEconomy(true),
            NoBasicEconomy(false),
            NoMixedCabin(true),
            NoMixedCabin(false),
            NoBasicNoMixed,
            AvoidRedEye(true),
            AvoidRedEye(false),
            DepartureWindow,
            ArrivalWindow,
            PlaneTypes,
            Airlines,
        ],
        Section::Hotel => &[HotelDaily, HotelTotal, MinRating, Brands],
        Section::Budget => &[TripTotal, Everyday],
        Section::Legs => &[Leg],
    }
}

pub(crate) const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

fn slot_pattern(slot: &str) -> String {
    match slot {
        "money" => r"\$(?P<money>\d+(?:\.\d\d)?)".into(),
        "cabin" => "(?P<cabin>coach|premium|business|first)".into(),
        "t1" => r"(?P<t1>\d\d:\d\d)".into(),
        "t2" => r"(?P<t2>\d\d:\d\d)".into(),
        "rating" => r"(?P<rating>\d(?:\.\d)?)".into(),
        "list" => "(?P<list>[A-Za-z0-9&' -]+)".into(),
        "date" => format!(
            r"(?P<date>(?:{}) \d{{1,2}}(?:st|nd|rd|th), \d{{4}})",
            MONTHS.join("|")
        ),
        "from" => "(?P<from>[A-Z]{3})".into(),
        "to" => "(?P<to>[A-Z]{3})".into(),
        other => unreachable!("unknown slot {other}"),
    }
}

/// Splits a template into literal text and slot names.
pub(crate) fn pieces(template: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            out.push((false, &rest[..open]));
        }
        let close = rest[open..].find('}').expect("template slots are closed") + open;
        out.push((true, &rest[open + 1..close]));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        out.push((false, rest));
    }
    out
}

pub(crate) struct CompiledClause {
    pub clause: Clause,
    pub regex: Regex,
}

fn compile(clause: Clause, template: &str) -> CompiledClause {
    let mut pattern = String::from("^(?:");
    for (is_slot, text) in pieces(template) {
        if is_slot {
            pattern.push_str(&slot_pattern(text));
        } else {
            pattern.push_str(&regex::escape(text));
        }
    }
    pattern.push_str(")(?P<sep>, and |, |$)");
    CompiledClause {
        clause,
        regex: Regex::new(&pattern).expect("clause templates compile"),
    }
}

static COMPILED: LazyLock<Vec<(Section, Vec<CompiledClause>)>> = LazyLock::new(|| {
    [
        Section::Airline,
        Section::Hotel,
        Section::Budget,
        Section::Legs,
    ]
    .into_iter()
    .map(|s| {
        let compiled = clauses(s)
            .iter()
            .flat_map(|&c| templates(c).iter().map(move |t| compile(c, t)))
            .collect();
        (s, compiled)
    })
    .collect()
});

pub(crate) fn compiled(section: Section) -> &'static [CompiledClause] {
    &COMPILED
        .iter()
        .find(|(s, _)| *s == section)
        .expect("every section is compiled")
        .1
}
