#include "shearforge/io.hpp"

namespace shearforge {

using nlohmann::json;

namespace {

std::string scalar_part(const std::string& s) { return s; }

bool looks_rational(const std::string& s) {
  for (char c : s)
    if (c == '.' || c == 'e' || c == 'E' || c == '@') return false;
  return true;
}

Scalar parse_parts(const std::string& re, const std::string& im, const IoMode& mode) {
  if (mode.exact) {
    if (!looks_rational(re) || !looks_rational(im))
      throw Error("exact mode expects rational strings, got '" + re + "' / '" + im + "'");
    return Scalar::rational(Rational::parse(re), Rational::parse(im));
  }
  if (looks_rational(re) && looks_rational(im)) {
    return Scalar::rational(Rational::parse(re), Rational::parse(im))
        .to_float(mode.precision_bits);
  }
  return Scalar::floating(Float::parse(re, mode.precision_bits),
                          Float::parse(im, mode.precision_bits));
}

Vec vec_from_json(const json& j, const IoMode& mode) {
  Vec v;
  for (const auto& e : j) v.push_back(scalar_from_json(e, mode));
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (const auto& s : v) j.push_back(to_json(s));
  return j;
}

template <class R>
json ring_to_json(const R& v) {
  return to_json(v);
}

template <class R>
R ring_from_json(const json& j, const IoMode& mode) {
  if constexpr (RingOps<R>::parametric)
    return xpoly_from_json(j, mode);
  else
    return scalar_from_json(j, mode);
}

template <class R>
json fn_to_json(const ShearFn<R>& f) {
  json poly = json::array();
  for (const auto& c : f.poly().coeffs()) poly.push_back(ring_to_json<R>(c));
  if (f.plain()) {
    // plain coefficient list, low degree first
    return poly;
  }
  json out;
  out["poly"] = std::move(poly);
  json roots = json::array();
  for (const auto& [root, m] : f.roots())
    roots.push_back(json{{"point", to_json(root)}, {"mult", m}});
  out["roots"] = std::move(roots);
  if (f.has_sep()) {
    json sep = json::array();
    for (const auto& c : f.sep().coeffs()) sep.push_back(to_json(c));
    out["sep"] = std::move(sep);
    out["power"] = f.power();
  }
  return out;
}

template <class R>
ShearFn<R> fn_from_json(const json& j, const IoMode& mode) {
  if (j.is_array()) {
    std::vector<R> c;
    for (const auto& e : j) c.push_back(ring_from_json<R>(e, mode));
    return ShearFn<R>(UniPoly<R>(std::move(c)));
  }
  std::vector<R> c;
  for (const auto& e : j.at("poly")) c.push_back(ring_from_json<R>(e, mode));
  std::vector<std::pair<Scalar, int>> roots;
  if (j.contains("roots"))
    for (const auto& e : j.at("roots"))
      roots.push_back({scalar_from_json(e.at("point"), mode), e.at("mult").get<int>()});
  UniPoly<Scalar> sep;
  long power = 0;
  if (j.contains("sep")) {
    std::vector<Scalar> sc;
    for (const auto& e : j.at("sep")) sc.push_back(scalar_from_json(e, mode));
    sep = UniPoly<Scalar>(std::move(sc));
    power = j.at("power").get<long>();
  }
  return ShearFn<R>(UniPoly<R>(std::move(c)), std::move(roots), std::move(sep), power);
}

template <class R>
json jet_to_json_impl(const Jet<R>& jet) {
  json out;
  out["n"] = jet.dim();
  out["order"] = jet.order();
  json anchor = json::array(), value = json::array();
  for (const auto& a : jet.anchor()) anchor.push_back(ring_to_json<R>(a));
  for (const auto& v : jet.value()) value.push_back(ring_to_json<R>(v));
  out["anchor"] = std::move(anchor);
  out["value"] = std::move(value);
  json coeffs = json::array();
  for (int i = 0; i < jet.dim(); ++i) {
    const auto& tab = jet.comp(i).table();
    for (int rank = 1; rank < jet.comp(i).size(); ++rank) {
      const R& c = jet.comp(i).at(rank);
      if (c.is_zero()) continue;
      json entry;
      entry["component"] = i;
      entry["exponents"] = tab.exponents(rank);
      entry["value"] = ring_to_json<R>(c);
      coeffs.push_back(std::move(entry));
    }
  }
  out["coeffs"] = std::move(coeffs);
  return out;
}

template <class R>
Jet<R> jet_from_json_impl(const json& j, const IoMode& mode) {
  int n = j.at("n").get<int>();
  int order = j.at("order").get<int>();
  std::vector<R> anchor, value;
  for (const auto& e : j.at("anchor")) anchor.push_back(ring_from_json<R>(e, mode));
  for (const auto& e : j.at("value")) value.push_back(ring_from_json<R>(e, mode));
  Jet<R> jet(n, order, std::move(anchor), std::move(value));
  for (const auto& e : j.at("coeffs")) {
    std::vector<int> exps = e.at("exponents").get<std::vector<int>>();
    jet.set_coeff(e.at("component").get<int>(), exps,
                  ring_from_json<R>(e.at("value"), mode));
  }
  return jet;
}

template <class R>
json word_to_json_impl(const AutoWord<R>& w) {
  json out;
  out["n"] = w.n;
  out["convention"] = "factors[0] applied last";
  json factors = json::array();
  for (const auto& f : w.factors) {
    json entry = std::visit(
        [](const auto& g) -> json {
          using T = std::decay_t<decltype(g)>;
          json e;
          if constexpr (std::is_same_v<T, Shear<R>>) {
            e["variant"] = "shear";
            e["form"] = vec_to_json(g.form.coeffs);
            e["dir"] = vec_to_json(g.dir);
            e["fn"] = fn_to_json<R>(g.fn);
          } else if constexpr (std::is_same_v<T, Overshear<R>>) {
            e["variant"] = "overshear";
            e["form"] = vec_to_json(g.form.coeffs);
            e["dir"] = vec_to_json(g.dir);
            e["fn"] = fn_to_json<R>(g.fn);
          } else if constexpr (std::is_same_v<T, Translation<R>>) {
            e["variant"] = "translation";
            json t = json::array();
            for (const auto& c : g.offset) t.push_back(ring_to_json<R>(c));
            e["offset"] = std::move(t);
          } else {
            e["variant"] = "linear";
            json m = json::array();
            for (int i = 0; i < g.m.dim(); ++i) {
              json row = json::array();
              for (int jj = 0; jj < g.m.dim(); ++jj)
                row.push_back(ring_to_json<R>(g.m(i, jj)));
              m.push_back(std::move(row));
            }
            e["matrix"] = std::move(m);
          }
          return e;
        },
        f);
    factors.push_back(std::move(entry));
  }
  out["factors"] = std::move(factors);
  return out;
}

template <class R>
AutoWord<R> word_from_json_impl(const json& j, const IoMode& mode) {
  AutoWord<R> w;
  w.n = j.at("n").get<int>();
  for (const auto& e : j.at("factors")) {
    std::string variant = e.at("variant").get<std::string>();
    if (variant == "shear" || variant == "overshear") {
      LinForm form{vec_from_json(e.at("form"), mode)};
      Vec dir = vec_from_json(e.at("dir"), mode);
      ShearFn<R> fn = fn_from_json<R>(e.at("fn"), mode);
      if (variant == "shear")
        w.factors.push_back(make_shear<R>(std::move(form), std::move(dir), std::move(fn)));
      else
        w.factors.push_back(
            make_overshear<R>(std::move(form), std::move(dir), std::move(fn)));
    } else if (variant == "translation") {
      std::vector<R> t;
      for (const auto& c : e.at("offset")) t.push_back(ring_from_json<R>(c, mode));
      w.factors.push_back(Translation<R>{std::move(t)});
    } else if (variant == "linear") {
      const auto& m = e.at("matrix");
      int n = static_cast<int>(m.size());
      Matrix<R> mat(n);
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj)
          mat(i, jj) = ring_from_json<R>(m.at(i).at(jj), mode);
      w.factors.push_back(LinearMap<R>{std::move(mat)});
    } else {
      throw Error("unknown factor variant: " + variant);
    }
  }
  return w;
}

PlaneBox box_from_json(const json& j, const IoMode& mode) {
  return PlaneBox{scalar_from_json(j.at("re_lo"), mode),
                  scalar_from_json(j.at("re_hi"), mode),
                  scalar_from_json(j.at("im_lo"), mode),
                  scalar_from_json(j.at("im_hi"), mode)};
}

json box_to_json(const PlaneBox& b) {
  return json{{"re_lo", to_json(b.re_lo)},
              {"re_hi", to_json(b.re_hi)},
              {"im_lo", to_json(b.im_lo)},
              {"im_hi", to_json(b.im_hi)}};
}

template <class R>
json problem_to_json_impl(const Problem<R>& spec) {
  json out;
  out["schema"] = "shearforge/problem/v1";
  out["n"] = spec.n;
  out["volume"] = spec.volume;
  out["param"] = RingOps<R>::parametric ? "poly1" : "none";
  out["seed"] = spec.config.seed;
  out["precision_bits"] = static_cast<long>(spec.config.precision_bits);
  json targets = json::array();
  for (const auto& t : spec.targets)
    targets.push_back(json{{"jet", jet_to_json_impl<R>(t.jet)}});
  out["targets"] = std::move(targets);
  json fix = json::array();
  for (const auto& [p, o] : spec.fix)
    fix.push_back(json{{"point", vec_to_json(p)}, {"order", o}});
  out["fix"] = std::move(fix);
  json axis = json::array();
  for (const auto& c : spec.axis_points) axis.push_back(vec_to_json(c));
  out["axis_points"] = std::move(axis);
  if (spec.approx) {
    json box = json::array();
    for (const auto& b : spec.approx->box) box.push_back(box_to_json(b));
    json ap;
    ap["box"] = std::move(box);
    ap["eps"] = to_json(spec.approx->eps);
    if (!spec.approx->param_grid.empty()) {
      json g = json::array();
      for (const auto& x : spec.approx->param_grid) g.push_back(to_json(x));
      ap["param_grid"] = std::move(g);
    }
    out["approx"] = std::move(ap);
  }
  return out;
}

}  // namespace

json to_json(const Scalar& s) {
  return json{{"re", s.str_re()}, {"im", s.str_im()}};
}

Scalar scalar_from_json(const json& j, const IoMode& mode) {
  if (!j.is_object() || !j.contains("re"))
    throw Error("scalar must be an object with re/im strings");
  std::string re = j.at("re").get<std::string>();
  std::string im = j.contains("im") ? j.at("im").get<std::string>() : "0";
  return parse_parts(scalar_part(re), scalar_part(im), mode);
}

json to_json(const XPoly& p) {
  json c = json::array();
  for (const auto& s : p.coeffs()) c.push_back(to_json(s));
  return json{{"x", std::move(c)}};
}

XPoly xpoly_from_json(const json& j, const IoMode& mode) {
  if (j.is_object() && j.contains("x")) {
    std::vector<Scalar> c;
    for (const auto& e : j.at("x")) c.push_back(scalar_from_json(e, mode));
    return XPoly(std::move(c));
  }
  // a bare scalar is a constant polynomial
  return XPoly::constant(scalar_from_json(j, mode));
}

json to_json(const JetMap& jet) { return jet_to_json_impl<Scalar>(jet); }
json to_json(const ParamJet& jet) { return jet_to_json_impl<XPoly>(jet); }
JetMap jet_from_json(const json& j, const IoMode& mode) {
  return jet_from_json_impl<Scalar>(j, mode);
}
ParamJet param_jet_from_json(const json& j, const IoMode& mode) {
  return jet_from_json_impl<XPoly>(j, mode);
}

json to_json(const Word& w) { return word_to_json_impl<Scalar>(w); }
json to_json(const ParamWord& w) { return word_to_json_impl<XPoly>(w); }
Word word_from_json(const json& j, const IoMode& mode) {
  return word_from_json_impl<Scalar>(j, mode);
}
ParamWord param_word_from_json(const json& j, const IoMode& mode) {
  return word_from_json_impl<XPoly>(j, mode);
}

json to_json(const ProblemSpec& spec) {
  json out = problem_to_json_impl<Scalar>(spec);
  out["mode"] = "exact";  // callers overwrite for float problems
  return out;
}
json to_json(const ParamProblem& spec) {
  json out = problem_to_json_impl<XPoly>(spec);
  out["mode"] = "float";
  return out;
}

LoadedProblem problem_from_json(const json& j) {
  LoadedProblem out;
  std::string schema = j.value("schema", "shearforge/problem/v1");
  if (schema != "shearforge/problem/v1") throw Error("unknown problem schema: " + schema);
  out.mode.exact = j.value("mode", std::string("exact")) == "exact";
  out.mode.precision_bits = j.value("precision_bits", (long)kDefaultPrecision);
  if (!out.mode.exact && out.mode.precision_bits < 64)
    throw Error("float mode needs precision_bits >= 64");
  out.parametric = j.value("param", std::string("none")) == "poly1";

  auto fill = [&](auto& spec) {
    spec.n = j.at("n").get<int>();
    spec.volume = j.value("volume", false);
    spec.config.precision_bits = out.mode.precision_bits;
    spec.config.seed = j.value("seed", (std::uint64_t)1);
    if (j.contains("fix"))
      for (const auto& e : j.at("fix"))
        spec.fix.push_back({vec_from_json(e.at("point"), out.mode),
                            e.at("order").get<int>()});
    if (j.contains("axis_points"))
      for (const auto& e : j.at("axis_points"))
        spec.axis_points.push_back(vec_from_json(e, out.mode));
    if (j.contains("approx")) {
      ApproxSpec ap;
      for (const auto& b : j.at("approx").at("box"))
        ap.box.push_back(box_from_json(b, out.mode));
      ap.eps = scalar_from_json(j.at("approx").at("eps"), out.mode);
      if (j.at("approx").contains("param_grid"))
        for (const auto& x : j.at("approx").at("param_grid"))
          ap.param_grid.push_back(scalar_from_json(x, out.mode));
      spec.approx = std::move(ap);
    }
  };

  if (out.parametric) {
    fill(out.param_problem);
    for (const auto& t : j.at("targets"))
      out.param_problem.targets.push_back(
          {param_jet_from_json(t.at("jet"), out.mode)});
    if (j.contains("param_grid"))
      for (const auto& x : j.at("param_grid"))
        out.param_grid.push_back(scalar_from_json(x, out.mode));
    if (out.param_grid.empty() && out.param_problem.approx)
      out.param_grid = out.param_problem.approx->param_grid;
  } else {
    fill(out.scalar_problem);
    for (const auto& t : j.at("targets"))
      out.scalar_problem.targets.push_back({jet_from_json(t.at("jet"), out.mode)});
  }
  return out;
}

json to_json(const Report& rep) {
  json out;
  out["schema"] = "shearforge/report/v1";
  out["mode"] = rep.mode;
  out["precision_bits"] = rep.precision_bits;
  out["seed"] = rep.seed;
  out["grid_res"] = rep.grid_res;
  out["pass"] = rep.pass;
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back(json{{"id", e.id},
                           {"residual", e.residual},
                           {"exact_zero", e.exact_zero},
                           {"tolerance", e.tolerance},
                           {"pass", e.pass}});
  out["entries"] = std::move(entries);
  return out;
}

namespace {

template <class R>
json transvections_to_json_impl(int n, const std::vector<Transvection<R>>& ts) {
  json out;
  out["n"] = n;
  out["ring"] = RingOps<R>::parametric ? "poly1" : "scalar";
  json entries = json::array();
  for (const auto& t : ts) {
    // 1-based indices in certificates, matching the usual matrix notation
    entries.push_back(json{{"row", t.row + 1},
                           {"col", t.col + 1},
                           {"amount", ring_to_json<R>(t.amount)}});
  }
  out["entries"] = std::move(entries);
  if constexpr (!RingOps<R>::parametric) {
    json blocks = json::array();
    for (const auto& [tri, len] : transvection_blocks(ts))
      blocks.push_back(json{{"triangle", std::string(1, tri)}, {"count", len}});
    out["blocks"] = std::move(blocks);
  }
  return out;
}

}  // namespace

json transvections_to_json(int n, const std::vector<Transvection<Scalar>>& ts) {
  return transvections_to_json_impl<Scalar>(n, ts);
}
json transvections_to_json(int n, const std::vector<Transvection<XPoly>>& ts) {
  return transvections_to_json_impl<XPoly>(n, ts);
}

LoadedMatrix matrix_from_json(const json& j) {
  LoadedMatrix out;
  out.mode.exact = j.value("mode", std::string("exact")) == "exact";
  out.mode.precision_bits = j.value("precision_bits", (long)kDefaultPrecision);
  out.parametric = j.value("ring", std::string("scalar")) == "poly1";
  const auto& m = j.at("entries");
  int n = static_cast<int>(m.size());
  if (out.parametric) {
    out.poly_matrix = PolyMat(n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        out.poly_matrix(i, jj) = xpoly_from_json(m.at(i).at(jj), out.mode);
  } else {
    out.scalar_matrix = Mat(n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        out.scalar_matrix(i, jj) = scalar_from_json(m.at(i).at(jj), out.mode);
  }
  return out;
}

json basis_to_json(const ShearBasis& basis) {
  json out;
  out["n"] = basis.n;
  out["degree"] = basis.r;
  out["seed"] = basis.seed;
  out["axis_margin"] = to_json(basis.axis_margin);
  auto gens = [&](const std::vector<std::pair<LinForm, Vec>>& list) {
    json g = json::array();
    for (const auto& [form, dir] : list)
      g.push_back(json{{"form", vec_to_json(form.coeffs)}, {"dir", vec_to_json(dir)}});
    return g;
  };
  out["a_generators"] = gens(basis.a_gens);
  out["b_generators"] = gens(basis.b_gens);
  json avoid = json::array();
  for (const auto& a : basis.avoid) avoid.push_back(vec_to_json(a));
  out["avoid"] = std::move(avoid);
  return out;
}

}  // namespace shearforge
