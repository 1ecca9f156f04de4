#include "fleetopt/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fleetopt/feasibility.hpp"
#include "fleetopt/io.hpp"

namespace fleetopt {

std::uint32_t MilpModel::add_var(std::string name, VarType type, double lower, double upper) {
  const auto ix = static_cast<std::uint32_t>(vars.size());
  if (!by_name_.emplace(name, ix).second) throw std::runtime_error("duplicate variable name '" + name + "'");
  vars.push_back({std::move(name), type, lower, upper});
  return ix;
}

std::optional<std::uint32_t> MilpModel::find(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const MilpConstraint* MilpModel::constraint(const std::string& name) const {
  for (const auto& c : constraints) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

std::map<std::string, double> named_terms(const MilpModel& m, const std::vector<MilpTerm>& terms) {
  std::map<std::string, double> out;
  for (const auto& t : terms) out[m.vars[t.var].name] += t.coef;
  return out;
}

}  // namespace

bool same_model(const MilpModel& a, const MilpModel& b) {
  if (a.vars.size() != b.vars.size() || a.constraints.size() != b.constraints.size()) return false;
  using VarKey = std::tuple<VarType, double, double>;
  std::map<std::string, VarKey> va;
  std::map<std::string, VarKey> vb;
  for (const auto& v : a.vars) va[v.name] = {v.type, v.lower, v.upper};
  for (const auto& v : b.vars) vb[v.name] = {v.type, v.lower, v.upper};
  if (va != vb) return false;

  using RowKey = std::tuple<Sense, double, std::map<std::string, double>>;
  std::map<std::string, RowKey> ra;
  std::map<std::string, RowKey> rb;
  for (const auto& c : a.constraints) ra[c.name] = {c.sense, c.rhs, named_terms(a, c.terms)};
  for (const auto& c : b.constraints) rb[c.name] = {c.sense, c.rhs, named_terms(b, c.terms)};
  if (ra != rb) return false;
  return named_terms(a, a.objective) == named_terms(b, b.objective);
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& ch : out) {
    const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_';
    if (!ok) ch = '_';
  }
  return out;
}

namespace {

/// Tasks a vehicle may be assigned: all trips, plus every charging slot for
/// electric vehicles, in chronological order.
std::vector<Task> task_universe(const Instance& inst, VehicleIdx v) {
  std::vector<Task> tasks;
  for (TripIdx t = 0; t < inst.trip_count(); ++t) tasks.push_back(Task::for_trip(t));
  if (inst.is_electric(v)) {
    for (PoleIdx p = 0; p < inst.pole_count(); ++p) {
      for (SlotIdx s = 0; s < inst.slot_count(); ++s) tasks.push_back(Task::for_charge(p, s));
    }
  }
  sort_schedule(inst, tasks);
  return tasks;
}

std::string task_suffix(const Instance& inst, Task x) {
  if (x.is_trip()) return sanitize_id(inst.trip(x.index).id);
  return sanitize_id(inst.pole(x.index).id) + "_" + std::to_string(x.slot);
}

std::string pair_suffix(const Instance& inst, VehicleIdx v, Task x1, Task x2) {
  return sanitize_id(inst.vehicle(v).id) + "_" + task_suffix(inst, x1) + "_" + task_suffix(inst, x2);
}

void add_row(MilpModel& m, std::string name, std::vector<MilpTerm> terms, Sense sense, double rhs) {
  if (terms.empty()) return;
  m.constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

}  // namespace

std::string task_var_name(const Instance& inst, VehicleIdx v, Task x) {
  const std::string vid = sanitize_id(inst.vehicle(v).id);
  if (x.is_trip()) return "a_" + vid + "_" + sanitize_id(inst.trip(x.index).id);
  return "ach_" + vid + "_" + sanitize_id(inst.pole(x.index).id) + "_" + std::to_string(x.slot);
}

std::size_t projected_var_count(const Instance& inst) {
  std::size_t total = 0;
  const std::size_t slots = static_cast<std::size_t>(inst.slot_count());
  for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
    std::size_t n = inst.trip_count();
    if (inst.is_electric(v)) {
      n += inst.pole_count() * slots;
      total += 2 * slots + 1;
    }
    total += n + n * (n - 1) / 2;
  }
  return total;
}

MilpModel build_milp(const Instance& inst, std::size_t var_cap) {
  const std::size_t projected = projected_var_count(inst);
  if (projected > var_cap) {
    throw ModelTooLarge("model needs " + std::to_string(projected) + " variables, cap is " + std::to_string(var_cap));
  }
  MilpModel m;
  const SlotIdx slots = inst.slot_count();
  const SlotGrid& grid = inst.slots();

  std::vector<std::vector<Task>> universe(inst.vehicle_count());
  std::vector<std::map<std::pair<std::uint32_t, SlotIdx>, std::uint32_t>> task_var(inst.vehicle_count());
  const auto var_of = [&](VehicleIdx v, Task x) {
    return task_var[v].at({x.is_trip() ? x.index : inst.trip_count() + x.index, x.is_trip() ? 0 : x.slot});
  };

  for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
    universe[v] = task_universe(inst, v);
    for (TripIdx t = 0; t < inst.trip_count(); ++t) {
      const Task x = Task::for_trip(t);
      task_var[v][{t, 0}] = m.add_var(task_var_name(inst, v, x), VarType::binary, 0.0, 1.0);
    }
    if (!inst.is_electric(v)) continue;
    for (PoleIdx p = 0; p < inst.pole_count(); ++p) {
      for (SlotIdx s = 0; s < slots; ++s) {
        const Task x = Task::for_charge(p, s);
        task_var[v][{inst.trip_count() + p, s}] = m.add_var(task_var_name(inst, v, x), VarType::binary, 0.0, 1.0);
      }
    }
  }

  for (TripIdx t = 0; t < inst.trip_count(); ++t) {
    std::vector<MilpTerm> terms;
    for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) terms.push_back({var_of(v, Task::for_trip(t)), 1.0});
    add_row(m, "trip_" + sanitize_id(inst.trip(t).id), std::move(terms), Sense::eq, 1.0);
  }
  for (PoleIdx p = 0; p < inst.pole_count(); ++p) {
    for (SlotIdx s = 0; s < slots; ++s) {
      std::vector<MilpTerm> terms;
      for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
        if (inst.is_electric(v)) terms.push_back({var_of(v, Task::for_charge(p, s)), 1.0});
      }
      add_row(m, "slot_" + sanitize_id(inst.pole(p).id) + "_" + std::to_string(s), std::move(terms), Sense::le, 1.0);
    }
  }

  for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
    const std::string vid = sanitize_id(inst.vehicle(v).id);
    const double k = inst.cost_weight(v);
    const auto& tasks = universe[v];
    std::vector<std::vector<MilpTerm>> slot_use(static_cast<std::size_t>(slots));

    for (const Task& x : tasks) {
      if (!x.is_trip()) continue;
      const double e = inst.trip_energy(v, x.index);
      if (e != 0.0) {
        m.objective.push_back({var_of(v, x), k * e});
        slot_use[grid.slot_of(inst.trip(x.index).end_s)].push_back({var_of(v, x), e});
      }
    }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const Task x1 = tasks[i];
      const TaskWindow w1 = window(inst, x1);
      for (std::size_t j = i + 1; j < tasks.size(); ++j) {
        const Task x2 = tasks[j];
        const TaskWindow w2 = window(inst, x2);
        const std::string suffix = pair_suffix(inst, v, x1, x2);
        const std::uint32_t mv = m.add_var("m_" + suffix, VarType::binary, 0.0, 1.0);
        if (!pair_feasible(inst, x1, x2)) {
          add_row(m, "fb_" + suffix, {{var_of(v, x1), 1.0}, {var_of(v, x2), 1.0}}, Sense::le, 1.0);
        }
        std::vector<MilpTerm> link{{mv, 1.0}, {var_of(v, x1), -1.0}, {var_of(v, x2), -1.0}};
        for (std::size_t b = i + 1; b < j; ++b) link.push_back({var_of(v, tasks[b]), 1.0});
        add_row(m, "lk_" + suffix, std::move(link), Sense::ge, -1.0);

        const double dh = inst.deadhead_energy(v, w1.destination, w2.origin);
        if (dh != 0.0) {
          m.objective.push_back({mv, k * dh});
          slot_use[grid.slot_of(w2.start)].push_back({mv, dh});
        }
      }
    }

    if (!inst.is_electric(v)) continue;
    const double cap = inst.capacity(v);
    std::vector<std::uint32_t> c(static_cast<std::size_t>(slots));
    std::vector<std::uint32_t> e(static_cast<std::size_t>(slots) + 1);
    for (SlotIdx s = 0; s < slots; ++s) {
      c[s] = m.add_var("c_" + vid + "_" + std::to_string(s), VarType::continuous, 0.0, cap);
    }
    for (SlotIdx s = 0; s <= slots; ++s) {
      const std::string name = "e_" + vid + "_" + std::to_string(s);
      e[s] = s == 0 ? m.add_var(name, VarType::continuous, inst.initial_charge(v), inst.initial_charge(v))
                    : m.add_var(name, VarType::continuous, kBatteryEpsilon, cap);
    }
    for (SlotIdx s = 0; s < slots; ++s) {
      std::vector<MilpTerm> terms{{c[s], 1.0}};
      for (PoleIdx p = 0; p < inst.pole_count(); ++p) {
        const double power = inst.pole_power(p, v);
        if (power != 0.0) terms.push_back({var_of(v, Task::for_charge(p, s)), -power});
      }
      add_row(m, "cap_" + vid + "_" + std::to_string(s), std::move(terms), Sense::le, 0.0);
    }
    for (SlotIdx s = 0; s < slots; ++s) {
      std::vector<MilpTerm> terms{{e[s + 1], 1.0}, {e[s], -1.0}, {c[s], -1.0}};
      for (const auto& t : slot_use[s]) terms.push_back(t);
      add_row(m, "bal_" + vid + "_" + std::to_string(s), std::move(terms), Sense::eq, 0.0);
    }
  }
  return m;
}

namespace {

std::string number(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

constexpr std::size_t kLineWidth = 200;

void write_terms(std::ostringstream& out, std::size_t& col, const MilpModel& m, const std::vector<MilpTerm>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    std::string piece;
    const double mag = std::abs(t.coef);
    if (t.coef < 0) {
      piece = "- ";
    } else if (!first) {
      piece = "+ ";
    }
    if (mag != 1.0) piece += number(mag) + " ";
    piece += m.vars[t.var].name;
    if (col + piece.size() + 1 > kLineWidth) {
      out << "\n ";
      col = 1;
    } else {
      out << ' ';
      ++col;
    }
    out << piece;
    col += piece.size();
    first = false;
  }
}

const char* sense_text(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::ge: return ">=";
    case Sense::eq: return "=";
  }
  return "=";
}

}  // namespace

std::string lp_text(const MilpModel& m) {
  std::ostringstream out;
  out << "\\ fleet assignment and charging model\n";
  out << "Minimize\n obj:";
  std::size_t col = 5;
  write_terms(out, col, m, m.objective);
  out << "\nSubject To\n";
  for (const auto& c : m.constraints) {
    out << ' ' << c.name << ':';
    col = c.name.size() + 2;
    write_terms(out, col, m, c.terms);
    out << ' ' << sense_text(c.sense) << ' ' << number(c.rhs) << '\n';
  }
  // Name order keeps the text independent of variable numbering, which a parser
  // assigns by first appearance.
  std::vector<const MilpVar*> by_name;
  by_name.reserve(m.vars.size());
  for (const auto& v : m.vars) by_name.push_back(&v);
  std::sort(by_name.begin(), by_name.end(), [](const MilpVar* a, const MilpVar* b) { return a->name < b->name; });
  out << "Bounds\n";
  for (const MilpVar* vp : by_name) {
    const MilpVar& v = *vp;
    if (v.type == VarType::binary) continue;
    if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << number(v.lower) << '\n';
    } else {
      out << ' ' << number(v.lower) << " <= " << v.name << " <= " << number(v.upper) << '\n';
    }
  }
  out << "Binaries\n";
  for (const MilpVar* v : by_name) {
    if (v->type == VarType::binary) out << ' ' << v->name << '\n';
  }
  out << "End\n";
  return out.str();
}

void export_lp(const MilpModel& model, const std::filesystem::path& path) { write_text_file(path, lp_text(model)); }

namespace {

enum class Section { none, objective, constraints, bounds, binaries, end };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::optional<double> as_number(const std::string& tok) {
  const std::string t = lower(tok);
  if (t == "inf" || t == "+inf" || t == "infinity" || t == "+infinity") return std::numeric_limits<double>::infinity();
  if (t == "-inf" || t == "-infinity") return -std::numeric_limits<double>::infinity();
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  double x = 0.0;
  const auto res = std::from_chars(first, tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) return std::nullopt;
  return x;
}

bool is_sense(const std::string& t) { return t == "<=" || t == ">=" || t == "=" || t == "=<" || t == "=>"; }

Sense to_sense(const std::string& t) {
  if (t == "<=" || t == "=<") return Sense::le;
  if (t == ">=" || t == "=>") return Sense::ge;
  return Sense::eq;
}

class LpReader {
 public:
  MilpModel parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> pending;
    while (std::getline(in, line)) {
      if (const auto c = line.find('\\'); c != std::string::npos) line.erase(c);
      const std::string key = lower(trim(line));
      if (const auto next = section_of(key)) {
        flush(pending);
        section_ = *next;
        continue;
      }
      std::istringstream words(line);
      std::string w;
      while (words >> w) pending.push_back(w);
      if (section_ == Section::constraints && complete_row(pending)) flush(pending);
      if (section_ == Section::bounds || section_ == Section::binaries) flush(pending);
    }
    flush(pending);
    if (section_ != Section::end) throw LpParseError("missing End section");
    return std::move(model_);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  }

  static std::optional<Section> section_of(const std::string& key) {
    if (key == "minimize" || key == "minimise" || key == "min") return Section::objective;
    if (key == "subject to" || key == "st" || key == "s.t.") return Section::constraints;
    if (key == "bounds") return Section::bounds;
    if (key == "binaries" || key == "binary" || key == "bin") return Section::binaries;
    if (key == "end") return Section::end;
    return std::nullopt;
  }

  static bool complete_row(const std::vector<std::string>& toks) {
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (is_sense(toks[i])) return true;
    }
    return false;
  }

  std::uint32_t var(const std::string& name) {
    if (auto ix = model_.find(name)) return *ix;
    return model_.add_var(name, VarType::continuous, 0.0, std::numeric_limits<double>::infinity());
  }

  std::vector<MilpTerm> expression(const std::vector<std::string>& toks, std::size_t from, std::size_t to) {
    std::vector<MilpTerm> terms;
    double sign = 1.0;
    double coef = 1.0;
    for (std::size_t i = from; i < to; ++i) {
      const std::string& t = toks[i];
      if (t == "+") continue;
      if (t == "-") {
        sign = -sign;
        continue;
      }
      if (const auto x = as_number(t)) {
        coef *= *x;
        continue;
      }
      terms.push_back({var(t), sign * coef});
      sign = 1.0;
      coef = 1.0;
    }
    return terms;
  }

  void flush(std::vector<std::string>& toks) {
    if (toks.empty()) return;
    switch (section_) {
      case Section::objective: {
        std::size_t from = 0;
        if (toks[0].back() == ':') from = 1;
        auto terms = expression(toks, from, toks.size());
        model_.objective.insert(model_.objective.end(), terms.begin(), terms.end());
        break;
      }
      case Section::constraints: {
        std::size_t from = 0;
        std::string name = "R" + std::to_string(model_.constraints.size() + 1);
        if (toks[0].back() == ':') {
          name = toks[0].substr(0, toks[0].size() - 1);
          from = 1;
        }
        std::size_t op = from;
        while (op < toks.size() && !is_sense(toks[op])) ++op;
        if (op + 2 != toks.size()) throw LpParseError("malformed constraint '" + name + "'");
        const auto rhs = as_number(toks[op + 1]);
        if (!rhs) throw LpParseError("bad right-hand side in '" + name + "'");
        model_.constraints.push_back({name, expression(toks, from, op), to_sense(toks[op]), *rhs});
        break;
      }
      case Section::bounds: bound(toks); break;
      case Section::binaries:
        for (const auto& t : toks) {
          auto& v = model_.vars[var(t)];
          v.type = VarType::binary;
          v.lower = 0.0;
          v.upper = 1.0;
        }
        break;
      case Section::none:
      case Section::end: throw LpParseError("content outside a section: '" + toks[0] + "'");
    }
    toks.clear();
  }

  void bound(const std::vector<std::string>& t) {
    if (t.size() == 5 && is_sense(t[1]) && is_sense(t[3])) {
      auto& v = model_.vars[var(t[2])];
      v.lower = as_number(t[0]).value();
      v.upper = as_number(t[4]).value();
    } else if (t.size() == 3 && is_sense(t[1])) {
      auto& v = model_.vars[var(t[0])];
      const auto x = as_number(t[2]);
      if (!x) throw LpParseError("bad bound value '" + t[2] + "'");
      switch (to_sense(t[1])) {
        case Sense::eq: v.lower = v.upper = *x; break;
        case Sense::le: v.upper = *x; break;
        case Sense::ge: v.lower = *x; break;
      }
    } else if (t.size() == 2 && lower(t[1]) == "free") {
      auto& v = model_.vars[var(t[0])];
      v.lower = -std::numeric_limits<double>::infinity();
      v.upper = std::numeric_limits<double>::infinity();
    } else {
      throw LpParseError("malformed bound line starting '" + t[0] + "'");
    }
  }

  MilpModel model_;
  Section section_ = Section::none;
};

}  // namespace

MilpModel parse_lp(const std::string& text) { return LpReader().parse(text); }

MilpModel read_lp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LpParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lp(buf.str());
}

std::vector<double> implied_values(const Instance& inst, const MilpModel& model, const Solution& sol) {
  std::vector<double> val(model.vars.size(), 0.0);
  const auto set = [&](const std::string& name, double x) {
    const auto ix = model.find(name);
    if (!ix) throw std::invalid_argument("model has no variable " + name);
    val[*ix] = x;
  };
  const Schedules scheds = schedules_of(inst, sol);
  for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) {
    const auto& tasks = scheds[v];
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      set(task_var_name(inst, v, tasks[i]), 1.0);
      if (i > 0) set("m_" + pair_suffix(inst, v, tasks[i - 1], tasks[i]), 1.0);
    }
    if (!inst.is_electric(v)) continue;
    const std::string vid = sanitize_id(inst.vehicle(v).id);
    for (const Task& x : tasks) {
      if (x.is_trip()) continue;
      const auto c = model.find("c_" + vid + "_" + std::to_string(x.slot));
      val[*c] += inst.pole_power(x.index, v);
    }
    set("e_" + vid + "_0", inst.initial_charge(v));
    for (SlotIdx s = 0; s < inst.slot_count(); ++s) {
      const MilpConstraint* row = model.constraint("bal_" + vid + "_" + std::to_string(s));
      const std::uint32_t target = *model.find("e_" + vid + "_" + std::to_string(s + 1));
      double rest = 0.0;
      double own = 0.0;
      for (const auto& t : row->terms) {
        if (t.var == target) {
          own += t.coef;
        } else {
          rest += t.coef * val[t.var];
        }
      }
      val[target] = (row->rhs - rest) / own;
    }
  }
  return val;
}

}  // namespace fleetopt
