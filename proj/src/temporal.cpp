#include "wdw/temporal.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <limits>
#include <map>

namespace wdw::temporal {

namespace {

constexpr std::int64_t kOpen = std::numeric_limits<std::int64_t>::max();

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Seconds per tick for the sub-day ladder.
std::int64_t seconds_per(Unit u) {
  switch (u) {
    case Unit::Seconde: return 1;
    case Unit::Minute: return 60;
    case Unit::Heure: return 3600;
    case Unit::Jour: return 86400;
    default: return 0;
  }
}

// Months per tick for the month ladder.
std::int64_t months_per(Unit u) {
  switch (u) {
    case Unit::Mois: return 1;
    case Unit::Trimestre: return 3;
    case Unit::Semestre: return 6;
    case Unit::Annee: return 12;
    default: return 0;
  }
}

bool in_day_ladder(Unit u) { return seconds_per(u) != 0; }
bool in_month_ladder(Unit u) { return months_per(u) != 0; }

struct UnitNames {
  Unit unit;
  const char* name;
};

constexpr std::array<UnitNames, kUnitCount> kNames{{
    {Unit::Annee, "annee"},
    {Unit::Semestre, "semestre"},
    {Unit::Trimestre, "trimestre"},
    {Unit::Mois, "mois"},
    {Unit::Semaine, "semaine"},
    {Unit::Jour, "jour"},
    {Unit::JourSemaine, "jour_semaine"},
    {Unit::Heure, "heure"},
    {Unit::Minute, "minute"},
    {Unit::Seconde, "seconde"},
}};

}  // namespace

const char* unit_name(Unit u) {
  for (const auto& n : kNames)
    if (n.unit == u) return n.name;
  return "?";
}

std::optional<Unit> unit_from_name(std::string_view name) {
  for (const auto& n : kNames)
    if (name == n.name) return n.unit;
  return std::nullopt;
}

// Direct edges: seconde<minute<heure<jour<semaine, jour<mois<trimestre<
// semestre<annee. semaine and the month ladder are incomparable (months are
// not whole weeks); jour_semaine is incomparable with everything.
bool finer_than(Unit fine, Unit coarse) {
  if (fine == coarse) return false;
  if (fine == Unit::JourSemaine || coarse == Unit::JourSemaine) return false;
  if (coarse == Unit::Semaine) return in_day_ladder(fine);
  if (fine == Unit::Semaine) return false;
  if (in_day_ladder(fine) && in_day_ladder(coarse)) return seconds_per(fine) < seconds_per(coarse);
  if (in_month_ladder(fine) && in_month_ladder(coarse)) return months_per(fine) < months_per(coarse);
  // Remaining case: day ladder below the month ladder.
  return in_day_ladder(fine) && in_month_ladder(coarse);
}

int compare(const Instant& a, const Instant& b) {
  if (a.unit != b.unit)
    raise(Errc::MixedUnits, std::string("cannot compare ") + unit_name(a.unit) + " with " + unit_name(b.unit));
  return a.ticks < b.ticks ? -1 : (a.ticks > b.ticks ? 1 : 0);
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

namespace {

std::int64_t month_index_of_day(std::int64_t day) {
  int y;
  unsigned m, d;
  civil_from_days(day, y, m, d);
  return static_cast<std::int64_t>(y - 1970) * 12 + (m - 1);
}

std::int64_t first_day_of_month_index(std::int64_t months) {
  const std::int64_t y = 1970 + floor_div(months, 12);
  const unsigned m = static_cast<unsigned>(months - floor_div(months, 12) * 12) + 1;
  return days_from_civil(static_cast<int>(y), m, 1);
}

}  // namespace

Instant coarsen_instant(const Instant& i, Unit coarse) {
  if (!finer_than(i.unit, coarse))
    raise(Errc::NotCoarser,
          std::string(unit_name(i.unit)) + " is not strictly finer than " + unit_name(coarse));
  if (in_day_ladder(i.unit)) {
    const std::int64_t secs = i.ticks * seconds_per(i.unit);
    if (coarse == Unit::Semaine) return {Unit::Semaine, floor_div(secs, 86400 * 7)};
    if (in_day_ladder(coarse)) return {coarse, floor_div(secs, seconds_per(coarse))};
    const std::int64_t months = month_index_of_day(floor_div(secs, 86400));
    return {coarse, floor_div(months, months_per(coarse))};
  }
  // Month ladder source.
  const std::int64_t months = i.ticks * months_per(i.unit);
  return {coarse, floor_div(months, months_per(coarse))};
}

std::int64_t first_fine_tick(const Instant& i, Unit fine) {
  if (fine == i.unit) return i.ticks;
  if (!finer_than(fine, i.unit))
    raise(Errc::NotCoarser,
          std::string(unit_name(fine)) + " is not finer than " + unit_name(i.unit));
  std::int64_t day = 0;
  if (i.unit == Unit::Semaine) {
    day = i.ticks * 7;
  } else if (in_month_ladder(i.unit)) {
    if (in_month_ladder(fine)) {
      // Exact: each ladder step is a whole multiple of the finer one.
      return i.ticks * months_per(i.unit) / months_per(fine);
    }
    day = first_day_of_month_index(i.ticks * months_per(i.unit));
  } else {
    const std::int64_t secs = i.ticks * seconds_per(i.unit);
    return secs / seconds_per(fine);
  }
  return day * (86400 / seconds_per(fine));
}

std::int64_t last_fine_tick(const Instant& i, Unit fine) {
  return first_fine_tick({i.unit, i.ticks + 1}, fine) - 1;
}

// --- textual syntax ---------------------------------------------------------

namespace {

[[noreturn]] void bad_instant(std::string_view text) {
  raise(Errc::SyntaxError, "malformed instant '" + std::string(text) + "'");
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Splits "a-b-c" style bodies on the given separators, in order.
std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

std::int64_t parse_day_body(std::string_view body, std::string_view whole) {
  auto parts = split(body, '-');
  // Leading '-' (negative year) would produce an empty first part; years
  // before 1970 are still positive in the proleptic calendar we exercise.
  if (parts.size() != 3) bad_instant(whole);
  std::int64_t y, m, d;
  if (!parse_int(parts[0], y) || !parse_int(parts[1], m) || !parse_int(parts[2], d)) bad_instant(whole);
  if (m < 1 || m > 12 || d < 1 || d > 31) bad_instant(whole);
  return days_from_civil(static_cast<int>(y), static_cast<unsigned>(m), static_cast<unsigned>(d));
}

}  // namespace

Instant parse_instant(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) bad_instant(text);
  const auto unit = unit_from_name(text.substr(0, colon));
  if (!unit) bad_instant(text);
  const std::string_view body = text.substr(colon + 1);
  std::int64_t v = 0;
  switch (*unit) {
    case Unit::Annee:
      if (!parse_int(body, v)) bad_instant(text);
      return {Unit::Annee, v - 1970};
    case Unit::Semestre:
    case Unit::Trimestre: {
      auto parts = split(body, '-');
      if (parts.size() != 2 || parts[1].size() != 2) bad_instant(text);
      const char tag = *unit == Unit::Semestre ? 'S' : 'Q';
      if (parts[1][0] != tag) bad_instant(text);
      std::int64_t y, k;
      if (!parse_int(parts[0], y) || !parse_int(parts[1].substr(1), k)) bad_instant(text);
      const std::int64_t per_year = *unit == Unit::Semestre ? 2 : 4;
      if (k < 1 || k > per_year) bad_instant(text);
      return {*unit, (y - 1970) * per_year + (k - 1)};
    }
    case Unit::Mois: {
      auto parts = split(body, '-');
      if (parts.size() != 2) bad_instant(text);
      std::int64_t y, m;
      if (!parse_int(parts[0], y) || !parse_int(parts[1], m) || m < 1 || m > 12) bad_instant(text);
      return {Unit::Mois, (y - 1970) * 12 + (m - 1)};
    }
    case Unit::Semaine:
    case Unit::JourSemaine:
      if (!parse_int(body, v)) bad_instant(text);
      return {*unit, v};
    case Unit::Jour:
      return {Unit::Jour, parse_day_body(body, text)};
    case Unit::Heure:
    case Unit::Minute:
    case Unit::Seconde: {
      const std::size_t t = body.find('T');
      if (t == std::string_view::npos) bad_instant(text);
      const std::int64_t day = parse_day_body(body.substr(0, t), text);
      auto clock = split(body.substr(t + 1), ':');
      const std::size_t want = *unit == Unit::Heure ? 1 : (*unit == Unit::Minute ? 2 : 3);
      if (clock.size() != want) bad_instant(text);
      std::int64_t h = 0, mi = 0, s = 0;
      if (!parse_int(clock[0], h) || h < 0 || h > 23) bad_instant(text);
      if (want >= 2 && (!parse_int(clock[1], mi) || mi < 0 || mi > 59)) bad_instant(text);
      if (want == 3 && (!parse_int(clock[2], s) || s < 0 || s > 59)) bad_instant(text);
      if (*unit == Unit::Heure) return {Unit::Heure, day * 24 + h};
      if (*unit == Unit::Minute) return {Unit::Minute, (day * 24 + h) * 60 + mi};
      return {Unit::Seconde, ((day * 24 + h) * 60 + mi) * 60 + s};
    }
  }
  bad_instant(text);
}

std::string format_instant(const Instant& i) {
  char buf[64];
  switch (i.unit) {
    case Unit::Annee:
      std::snprintf(buf, sizeof buf, "annee:%lld", static_cast<long long>(i.ticks + 1970));
      return buf;
    case Unit::Semestre:
      std::snprintf(buf, sizeof buf, "semestre:%lld-S%lld",
                    static_cast<long long>(floor_div(i.ticks, 2) + 1970),
                    static_cast<long long>(i.ticks - floor_div(i.ticks, 2) * 2 + 1));
      return buf;
    case Unit::Trimestre:
      std::snprintf(buf, sizeof buf, "trimestre:%lld-Q%lld",
                    static_cast<long long>(floor_div(i.ticks, 4) + 1970),
                    static_cast<long long>(i.ticks - floor_div(i.ticks, 4) * 4 + 1));
      return buf;
    case Unit::Mois:
      std::snprintf(buf, sizeof buf, "mois:%lld-%02lld",
                    static_cast<long long>(floor_div(i.ticks, 12) + 1970),
                    static_cast<long long>(i.ticks - floor_div(i.ticks, 12) * 12 + 1));
      return buf;
    case Unit::Semaine:
      std::snprintf(buf, sizeof buf, "semaine:%lld", static_cast<long long>(i.ticks));
      return buf;
    case Unit::JourSemaine:
      std::snprintf(buf, sizeof buf, "jour_semaine:%lld", static_cast<long long>(i.ticks));
      return buf;
    default: break;
  }
  // Day ladder with calendar rendering.
  const std::int64_t secs = i.ticks * seconds_per(i.unit);
  const std::int64_t day = floor_div(secs, 86400);
  const std::int64_t rem = secs - day * 86400;
  int y;
  unsigned m, d;
  civil_from_days(day, y, m, d);
  switch (i.unit) {
    case Unit::Jour:
      std::snprintf(buf, sizeof buf, "jour:%d-%02u-%02u", y, m, d);
      return buf;
    case Unit::Heure:
      std::snprintf(buf, sizeof buf, "heure:%d-%02u-%02uT%02lld", y, m, d,
                    static_cast<long long>(rem / 3600));
      return buf;
    case Unit::Minute:
      std::snprintf(buf, sizeof buf, "minute:%d-%02u-%02uT%02lld:%02lld", y, m, d,
                    static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60));
      return buf;
    default:
      std::snprintf(buf, sizeof buf, "seconde:%d-%02u-%02uT%02lld:%02lld:%02lld", y, m, d,
                    static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                    static_cast<long long>(rem % 60));
      return buf;
  }
}

// --- intervals and domains ---------------------------------------------------

Interval make_interval(Instant start, Instant end) {
  if (start.unit != end.unit)
    raise(Errc::MixedUnits, "interval bounds must share one unit");
  if (start.ticks > end.ticks)
    raise(Errc::EmptyInterval, "interval " + format_instant(start) + " .. " + format_instant(end) + " is empty");
  return Interval{start, end};
}

Interval make_open_interval(Instant start) { return Interval{start, std::nullopt}; }

namespace {

std::int64_t end_tick(const Interval& iv) { return iv.end ? iv.end->ticks : kOpen; }

Interval from_ticks(Unit u, std::int64_t s, std::int64_t e) {
  if (e == kOpen) return Interval{{u, s}, std::nullopt};
  return Interval{{u, s}, Instant{u, e}};
}

}  // namespace

TemporalDomain TemporalDomain::normalize(std::vector<Interval> intervals) {
  TemporalDomain out;
  if (intervals.empty()) return out;
  const Unit u = intervals.front().unit();
  for (const auto& iv : intervals) {
    if (iv.unit() != u || (iv.end && iv.end->unit != u))
      raise(Errc::MixedUnits, "domain intervals must share one unit");
    if (iv.end && iv.start.ticks > iv.end->ticks)
      raise(Errc::EmptyInterval, "empty interval in domain");
  }
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    if (a.start.ticks != b.start.ticks) return a.start.ticks < b.start.ticks;
    return end_tick(a) < end_tick(b);
  });
  std::int64_t cur_s = intervals.front().start.ticks;
  std::int64_t cur_e = end_tick(intervals.front());
  for (std::size_t k = 1; k < intervals.size(); ++k) {
    const std::int64_t s = intervals[k].start.ticks;
    const std::int64_t e = end_tick(intervals[k]);
    if (cur_e == kOpen || s <= cur_e + 1) {
      cur_e = std::max(cur_e, e);
    } else {
      out.intervals_.push_back(from_ticks(u, cur_s, cur_e));
      cur_s = s;
      cur_e = e;
    }
  }
  out.intervals_.push_back(from_ticks(u, cur_s, cur_e));
  return out;
}

Unit TemporalDomain::unit() const {
  if (intervals_.empty()) raise(Errc::EmptyInput, "empty domain has no unit");
  return intervals_.front().unit();
}

bool TemporalDomain::open_ended() const {
  return !intervals_.empty() && intervals_.back().open_ended();
}

bool TemporalDomain::contains(const Instant& t) const {
  for (const auto& iv : intervals_) {
    if (iv.unit() != t.unit) raise(Errc::MixedUnits, "instant unit differs from domain unit");
    if (t.ticks >= iv.start.ticks && t.ticks <= end_tick(iv)) return true;
  }
  return false;
}

std::int64_t TemporalDomain::grain_count() const {
  std::int64_t n = 0;
  for (const auto& iv : intervals_) {
    if (iv.open_ended()) raise(Errc::OpenEnded, "open-ended domain has no grain count");
    n += iv.end->ticks - iv.start.ticks + 1;
  }
  return n;
}

namespace {

void check_op_units(const TemporalDomain& a, const TemporalDomain& b) {
  if (!a.empty() && !b.empty() && a.unit() != b.unit())
    raise(Errc::MixedUnits, "domain operands must share one unit");
}

}  // namespace

TemporalDomain domain_union(const TemporalDomain& a, const TemporalDomain& b) {
  check_op_units(a, b);
  std::vector<Interval> all = a.intervals();
  all.insert(all.end(), b.intervals().begin(), b.intervals().end());
  return TemporalDomain::normalize(std::move(all));
}

TemporalDomain domain_intersection(const TemporalDomain& a, const TemporalDomain& b) {
  check_op_units(a, b);
  std::vector<Interval> out;
  if (a.empty() || b.empty()) return {};
  const Unit u = a.unit();
  std::size_t i = 0, j = 0;
  while (i < a.intervals().size() && j < b.intervals().size()) {
    const auto& x = a.intervals()[i];
    const auto& y = b.intervals()[j];
    const std::int64_t s = std::max(x.start.ticks, y.start.ticks);
    const std::int64_t e = std::min(end_tick(x), end_tick(y));
    if (s <= e) out.push_back(from_ticks(u, s, e));
    if (end_tick(x) < end_tick(y))
      ++i;
    else
      ++j;
  }
  return TemporalDomain::normalize(std::move(out));
}

TemporalDomain domain_difference(const TemporalDomain& a, const TemporalDomain& b) {
  check_op_units(a, b);
  if (a.empty()) return {};
  if (b.empty()) return a;
  const Unit u = a.unit();
  std::vector<Interval> out;
  for (const auto& x : a.intervals()) {
    std::int64_t s = x.start.ticks;
    const std::int64_t e = end_tick(x);
    for (const auto& y : b.intervals()) {
      const std::int64_t bs = y.start.ticks;
      const std::int64_t be = end_tick(y);
      if (be < s || bs > e) continue;
      if (bs > s) out.push_back(from_ticks(u, s, bs - 1));
      if (be == kOpen) {
        s = kOpen;
        break;
      }
      s = be + 1;
      if (s > e) break;
    }
    if (s != kOpen && s <= e) out.push_back(from_ticks(u, s, e));
  }
  return TemporalDomain::normalize(std::move(out));
}

std::string format_domain(const TemporalDomain& d) {
  std::string out = "<";
  bool first = true;
  for (const auto& iv : d.intervals()) {
    if (!first) out += ';';
    first = false;
    out += '[';
    out += format_instant(iv.start);
    out += ',';
    out += iv.end ? format_instant(*iv.end) : "NOW";
    out += ']';
  }
  out += '>';
  return out;
}

TemporalDomain parse_domain(std::string_view text) {
  auto fail = [&]() -> void { raise(Errc::SyntaxError, "malformed domain '" + std::string(text) + "'"); };
  if (text.size() < 2 || text.front() != '<' || text.back() != '>') fail();
  std::string_view body = text.substr(1, text.size() - 2);
  std::vector<Interval> ivs;
  if (body.empty()) return {};
  for (std::string_view part : split(body, ';')) {
    if (part.size() < 2 || part.front() != '[' || part.back() != ']') fail();
    std::string_view inner = part.substr(1, part.size() - 2);
    const std::size_t comma = inner.find(',');
    if (comma == std::string_view::npos) fail();
    const Instant start = parse_instant(inner.substr(0, comma));
    const std::string_view hi = inner.substr(comma + 1);
    if (hi == "NOW")
      ivs.push_back(make_open_interval(start));
    else
      ivs.push_back(make_interval(start, parse_instant(hi)));
  }
  return TemporalDomain::normalize(std::move(ivs));
}

std::vector<Instant> coarse_grains(const TemporalDomain& d, Unit coarse) {
  std::vector<Instant> out;
  for (const auto& iv : d.intervals()) {
    if (iv.open_ended()) raise(Errc::OpenEnded, "open-ended domain cannot be coarsened");
    const Instant lo = coarsen_instant(iv.start, coarse);
    const Instant hi = coarsen_instant(*iv.end, coarse);
    for (std::int64_t t = lo.ticks; t <= hi.ticks; ++t) {
      if (!out.empty() && out.back().ticks == t) continue;
      out.push_back({coarse, t});
    }
  }
  return out;
}

std::vector<std::pair<Instant, std::vector<std::size_t>>> group_by_grain(
    const std::vector<TemporalDomain>& domains, Unit coarse) {
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i].empty()) continue;
    if (!finer_than(domains[i].unit(), coarse))
      raise(Errc::NotCoarser, std::string("grouping unit ") + unit_name(coarse) +
                                  " is not strictly coarser than " + unit_name(domains[i].unit()));
    for (const Instant& g : coarse_grains(domains[i], coarse)) groups[g.ticks].push_back(i);
  }
  std::vector<std::pair<Instant, std::vector<std::size_t>>> out;
  out.reserve(groups.size());
  for (auto& [tick, idx] : groups) out.emplace_back(Instant{coarse, tick}, std::move(idx));
  return out;
}

}  // namespace wdw::temporal
