use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{long_date, Money, SymbolicRequest, TimeWindow, TripLeg};

use super::grammar::{headers, pieces, templates, Clause, Section, CLOSERS, OPENERS};

/// Picks among `n` alternatives.
enum Chooser {
    Fixed(usize),
    Random(ChaCha8Rng),
}

impl Chooser {
    fn pick(&mut self, n: usize) -> usize {
        match self {
            Chooser::Fixed(k) => *k % n,
            Chooser::Random(rng) => rng.random_range(0..n),
        }
    }
}

#[derive(Default)]
struct Values<'a> {
    money: Option<Money>,
    cabin: Option<&'static str>,
    window: Option<TimeWindow>,
    rating: Option<String>,
    list: Option<String>,
    leg: Option<&'a TripLeg>,
}

fn clock(minutes: u16) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

fn fill(template: &str, v: &Values<'_>) -> String {
    let mut out = String::new();
    for (is_slot, text) in pieces(template) {
        if !is_slot {
            out.push_str(text);
            continue;
        }
        let missing = "template slot has a value";
        match text {
            "money" => out.push_str(&v.money.expect(missing).to_string()),
            "cabin" => out.push_str(v.cabin.expect(missing)),
            "t1" => out.push_str(&clock(v.window.expect(missing).start)),
            "t2" => out.push_str(&clock(v.window.expect(missing).end)),
            "rating" => out.push_str(v.rating.as_deref().expect(missing)),
            "list" => out.push_str(v.list.as_deref().expect(missing)),
            "date" => out.push_str(&long_date(v.leg.expect(missing).date)),
            "from" => out.push_str(v.leg.expect(missing).origin.as_str()),
            "to" => out.push_str(v.leg.expect(missing).destination.as_str()),
            other => unreachable!("unknown slot {other}"),
        }
    }
    out
}

fn clause(ch: &mut Chooser, c: Clause, v: Values<'_>) -> String {
    let ts = templates(c);
    fill(ts[ch.pick(ts.len())], &v)
}

fn list(ch: &mut Chooser, set: &std::collections::BTreeSet<String>) -> String {
    let joiner = [" or ", " and "][ch.pick(2)];
    set.iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(joiner)
}

fn money(m: Money) -> Values<'static> {
    Values {
        money: Some(m),
        ..Values::default()
    }
}

fn airline_clauses(r: &SymbolicRequest, ch: &mut Chooser) -> Vec<String> {
    let a = &r.airline;
    let mut out = Vec::new();
    if let Some(c) = a.cabin_class {
        let v = Values {
            cabin: Some(c.as_str()),
            ..Values::default()
        };
        out.push(clause(ch, Clause::Cabin, v));
    }
    if let Some(b) = a.refundable {
        out.push(clause(ch, Clause::Refundable(b), Values::default()));
    }
    if let Some(b) = a.nonstop_only {
        out.push(clause(ch, Clause::Nonstop(b), Values::default()));
    }
    let combined =
        a.must_not_basic_economy == Some(true) && a.no_mixed_cabin == Some(true) && ch.pick(2) == 0;
    if combined {
        out.push(clause(ch, Clause::NoBasicNoMixed, Values::default()));
    } else {
        if let Some(b) = a.must_not_basic_economy {
            out.push(clause(ch, Clause::NoBasicEconomy(b), Values::default()));
        }
        if let Some(b) = a.no_mixed_cabin {
            out.push(clause(ch, Clause::NoMixedCabin(b), Values::default()));
        }
    }
    if let Some(b) = a.avoid_red_eye {
        out.push(clause(ch, Clause::AvoidRedEye(b), Values::default()));
    }
    for (c, w) in [
        (Clause::DepartureWindow, a.departure_time),
        (Clause::ArrivalWindow, a.arrival_time),
    ] {
        if let Some(w) = w {
            let v = Values {
                window: Some(w),
                ..Values::default()
            };
            out.push(clause(ch, c, v));
        }
    }
    for (c, set) in [
        (Clause::PlaneTypes, &a.plane_types),
        (Clause::Airlines, &a.preferred_airlines),
    ] {
        if let Some(set) = set {
            let v = Values {
                list: Some(list(ch, set)),
                ..Values::default()
            };
            out.push(clause(ch, c, v));
        }
    }
    if let Some(m) = a.price_total_max {
        out.push(clause(ch, Clause::PriceTotalMax, money(m)));
    }
    out
}

fn hotel_clauses(r: &SymbolicRequest, ch: &mut Chooser) -> Vec<String> {
    let h = &r.hotel;
    let mut out = Vec::new();
    if let Some(m) = h.daily_budget_max {
        out.push(clause(ch, Clause::HotelDaily, money(m)));
    }
    if let Some(m) = h.total_budget_max {
        out.push(clause(ch, Clause::HotelTotal, money(m)));
    }
    if let Some(rating) = h.min_rating {
        let v = Values {
            rating: Some(rating.to_string()),
            ..Values::default()
        };
        out.push(clause(ch, Clause::MinRating, v));
    }
    if let Some(set) = &h.brands {
        let v = Values {
            list: Some(list(ch, set)),
            ..Values::default()
        };
        out.push(clause(ch, Clause::Brands, v));
    }
    out
}

fn budget_clauses(r: &SymbolicRequest, ch: &mut Chooser) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(m) = r.budget.total_budget {
        out.push(clause(ch, Clause::TripTotal, money(m)));
    }
    if let Some(m) = r.budget.everyday_budget {
        out.push(clause(ch, Clause::Everyday, money(m)));
    }
    out
}

fn leg_clauses(r: &SymbolicRequest, ch: &mut Chooser) -> Vec<String> {
    r.legs
        .iter()
        .map(|leg| {
            let v = Values {
                leg: Some(leg),
                ..Values::default()
            };
            clause(ch, Clause::Leg, v)
        })
        .collect()
}

/// Joins clauses with ", ", optionally with ", and " before the last one.
fn join(items: &[String], and_last: bool) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(if and_last && i + 1 == items.len() {
                ", and "
            } else {
                ", "
            });
        }
        out.push_str(item);
    }
    out
}

fn render_with(r: &SymbolicRequest, ch: &mut Chooser) -> String {
    let orders: [[Section; 4]; 4] = [
        [
            Section::Airline,
            Section::Hotel,
            Section::Budget,
            Section::Legs,
        ],
        [
            Section::Legs,
            Section::Airline,
            Section::Hotel,
            Section::Budget,
        ],
        [
            Section::Hotel,
            Section::Airline,
            Section::Budget,
            Section::Legs,
        ],
        [
            Section::Legs,
            Section::Budget,
            Section::Hotel,
            Section::Airline,
        ],
    ];
    let mut sentences = vec![OPENERS[ch.pick(OPENERS.len())].to_string()];
    for section in orders[ch.pick(orders.len())] {
        let items = match section {
            Section::Airline => airline_clauses(r, ch),
            Section::Hotel => hotel_clauses(r, ch),
            Section::Budget => budget_clauses(r, ch),
            Section::Legs => leg_clauses(r, ch),
        };
        if items.is_empty() {
            continue;
        }
        let hs = headers(section);
        let header = hs[ch.pick(hs.len())];
        // Style 0 is plain commas except for legs; odd styles add "and".
        let style = ch.pick(4);
        let and_last = match style {
            0 => section == Section::Legs,
            2 => false,
            _ => true,
        };
        sentences.push(format!("{header}{}.", join(&items, and_last)));
    }
    sentences.push(CLOSERS[ch.pick(CLOSERS.len())].to_string());
    sentences.join(" ")
}

/// English text for `r`. Seed 0 gives the reference phrasing; other seeds
/// pick every paraphrase choice at random.
pub fn render_nl(r: &SymbolicRequest, seed: u64) -> String {
    if seed == 0 {
        return render_nl_variant(r, 0);
    }
    render_with(r, &mut Chooser::Random(ChaCha8Rng::seed_from_u64(seed)))
}

/// Text in which every choice takes alternative `k` (modulo its count).
pub fn render_nl_variant(r: &SymbolicRequest, k: usize) -> String {
    render_with(r, &mut Chooser::Fixed(k))
}
