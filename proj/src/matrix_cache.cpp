// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/matrix_cache.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace stepcert {

namespace {

constexpr const char* kMagic = "stepcert-cache 1";

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_factor_set(std::ostream& out, const char* tag,
                      const FactorSet& fs) {
  out << "factors " << tag << ' ' << fs.rat.size() << '\n';
  for (const RationalMatrix& m : fs.rat) {
    out << "factor " << m.rows << ' ' << m.cols << '\n';
    for (int i = 0; i < m.rows; ++i) {
      for (int j = 0; j < m.cols; ++j) {
        if (j) out << ' ';
        out << rational_to_string(m.at(i, j));
      }
      out << '\n';
    }
  }
}

class Parser {
public:
  explicit Parser(std::istream& in) : in_(in) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) {
      throw CorruptCache("cache file truncated");
    }
    return l;
  }

  bool at_end() { return in_.peek() == std::istream::traits_type::eof(); }

private:
  std::istream& in_;
};

FactorSet read_factor_set(Parser& p, const char* tag) {
  std::istringstream head(p.line());
  std::string kw, got_tag;
  std::size_t nblocks = 0;
  head >> kw >> got_tag >> nblocks;
  if (kw != "factors" || got_tag != tag || head.fail()) {
    throw CorruptCache("cache file: expected factor set '" +
                       std::string(tag) + "'");
  }
  FactorSet fs;
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::istringstream fh(p.line());
    std::string fkw;
    int rows = 0, cols = 0;
    fh >> fkw >> rows >> cols;
    if (fkw != "factor" || fh.fail() || rows <= 0 || cols <= 0 ||
        rows > 4096 || cols > 4096) {
      throw CorruptCache("cache file: bad factor header");
    }
    RationalMatrix m{rows, cols};
    for (int i = 0; i < rows; ++i) {
      std::istringstream row(p.line());
      for (int j = 0; j < cols; ++j) {
        std::string cell;
        row >> cell;
        if (cell.empty()) {
          throw CorruptCache("cache file: short factor row");
        }
        try {
          m.at(i, j) = rational_from_string(cell);
        } catch (const MalformedInput&) {
          throw CorruptCache("cache file: bad rational '" + cell + "'");
        }
      }
    }
    fs.rat.push_back(std::move(m));
  }
  rebuild_factor_mirrors(fs);
  return fs;
}

void check_factor_sizes(const FactorSet& fs, const std::vector<int>& sizes) {
  if (fs.rat.size() != sizes.size()) {
    throw CorruptCache("cache file: factor block count mismatch");
  }
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (fs.rat[b].rows != sizes[b] || fs.rat[b].cols != sizes[b]) {
      throw CorruptCache("cache file: factor size mismatch");
    }
  }
}

}  // namespace

void cache_save(const std::string& path,
                const std::vector<TransformSet>& sets) {
  std::ostringstream payload;
  payload << kMagic << '\n' << "sets " << sets.size() << '\n';
  for (const TransformSet& t : sets) {
    payload << "set " << element_class_name(t.cls) << ' ' << t.order << ' '
            << (t.dynamic ? 1 : 0) << '\n';
    write_factor_set(payload, "eval", t.eval_bernstein);
    write_factor_set(payload, "inv", t.from_lagrange);
    payload << "children " << t.child.size() << '\n';
    for (const FactorSet& fs : t.child) write_factor_set(payload, "child", fs);
    payload << "timechildren " << t.time_child.size() << '\n';
    for (const FactorSet& fs : t.time_child) {
      write_factor_set(payload, "time", fs);
    }
    payload << "endset\n";
  }
  std::string body = payload.str();
  char checksum[32];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                (unsigned long long)fnv1a(body));

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open '" + tmp + "' for writing");
    out << body << "checksum " << checksum << '\n';
    out.flush();
    if (!out) throw IoFailure("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoFailure("cannot move cache into place at '" + path + "'");
  }
}

std::vector<TransformSet> cache_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open cache file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoFailure("read error on cache file '" + path + "'");
  std::string content = buf.str();

  // split off the trailing checksum line
  auto pos = content.rfind("checksum ");
  if (pos == std::string::npos || (pos != 0 && content[pos - 1] != '\n')) {
    throw CorruptCache("cache file has no checksum line");
  }
  std::string body = content.substr(0, pos);
  std::istringstream tail(content.substr(pos));
  std::string kw, hex;
  tail >> kw >> hex;
  char expected[32];
  std::snprintf(expected, sizeof expected, "%016llx",
                (unsigned long long)fnv1a(body));
  if (hex != expected) {
    throw CorruptCache("cache file checksum mismatch");
  }

  std::istringstream stream(body);
  Parser p(stream);
  if (p.line() != kMagic) {
    throw CorruptCache("cache file has wrong format fingerprint");
  }
  std::istringstream counts(p.line());
  std::string skw;
  std::size_t nsets = 0;
  counts >> skw >> nsets;
  if (skw != "sets" || counts.fail() || nsets > 4096) {
    throw CorruptCache("cache file: bad set count");
  }

  std::vector<TransformSet> sets;
  for (std::size_t si = 0; si < nsets; ++si) {
    std::istringstream head(p.line());
    std::string kw2, cls_name;
    int order = 0, dyn = 0;
    head >> kw2 >> cls_name >> order >> dyn;
    if (kw2 != "set" || head.fail()) {
      throw CorruptCache("cache file: bad set header");
    }
    TransformSet t;
    try {
      t.cls = element_class_from_name(cls_name);
    } catch (const MalformedInput&) {
      throw CorruptCache("cache file: unknown element class '" + cls_name +
                         "'");
    }
    if (order < 1 || order > 12 || (dyn != 0 && dyn != 1)) {
      throw CorruptCache("cache file: order or dynamic flag out of range");
    }
    t.order = order;
    t.dynamic = dyn == 1;
    t.shape = determinant_orders(t.cls, t.order, t.dynamic);
    const auto sizes = block_sizes(t.shape);

    t.eval_bernstein = read_factor_set(p, "eval");
    check_factor_sizes(t.eval_bernstein, sizes);
    t.from_lagrange = read_factor_set(p, "inv");
    check_factor_sizes(t.from_lagrange, sizes);

    std::istringstream ch(p.line());
    std::string ckw;
    std::size_t nchildren = 0;
    ch >> ckw >> nchildren;
    const std::size_t expect_children =
        (t.dynamic ? 2 : 1) * subdivision_maps(t.cls).size();
    if (ckw != "children" || ch.fail() || nchildren != expect_children) {
      throw CorruptCache("cache file: wrong subdivision child count");
    }
    for (std::size_t q = 0; q < nchildren; ++q) {
      t.child.push_back(read_factor_set(p, "child"));
      check_factor_sizes(t.child.back(), sizes);
    }
    std::istringstream tc(p.line());
    std::size_t ntime = 0;
    tc >> ckw >> ntime;
    if (ckw != "timechildren" || tc.fail() ||
        ntime != (t.dynamic ? 2u : 0u)) {
      throw CorruptCache("cache file: wrong time child count");
    }
    for (std::size_t h = 0; h < ntime; ++h) {
      t.time_child.push_back(read_factor_set(p, "time"));
      check_factor_sizes(t.time_child.back(), sizes);
    }
    if (p.line() != "endset") {
      throw CorruptCache("cache file: missing set terminator");
    }
    sets.push_back(std::move(t));
  }
  return sets;
}

MatrixCache::MatrixCache() : builder_(&build_transform) {}

MatrixCache::MatrixCache(Builder builder) : builder_(builder) {}

void MatrixCache::preload(const std::string& path) {
  std::vector<TransformSet> sets = cache_load(path);
  std::unique_lock lock(mu_);
  for (TransformSet& t : sets) {
    Key key{t.cls, t.order, t.dynamic};
    entries_[key].ready =
        std::make_shared<const TransformSet>(std::move(t));
  }
}

std::shared_ptr<const TransformSet> MatrixCache::get(ElementClass cls, int p,
                                                     bool dynamic) {
  Key key{cls, p, dynamic};
  std::shared_ptr<std::once_flag> flag;
  {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end() && it->second.ready) return it->second.ready;
  }
  {
    std::unique_lock lock(mu_);
    Entry& e = entries_[key];
    if (e.ready) return e.ready;
    if (!e.building) e.building = std::make_shared<std::once_flag>();
    flag = e.building;
  }
  std::call_once(*flag, [&] {
    auto built = std::make_shared<const TransformSet>(builder_(cls, p,
                                                               dynamic));
    std::unique_lock lock(mu_);
    entries_[key].ready = std::move(built);
  });
  std::shared_lock lock(mu_);
  return entries_.find(key)->second.ready;
}

std::shared_ptr<const TransformSet> MatrixCache::get_resident(
    ElementClass cls, int p, bool dynamic) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(Key{cls, p, dynamic});
  if (it == entries_.end() || !it->second.ready) {
    throw CacheMiss("transform set not resident: " +
                    std::string(element_class_name(cls)) + " order " +
                    std::to_string(p) + (dynamic ? " dynamic" : " static"));
  }
  return it->second.ready;
}

std::vector<TransformSet> MatrixCache::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<TransformSet> out;
  for (const auto& [key, entry] : entries_) {
    if (entry.ready) out.push_back(*entry.ready);
  }
  return out;
}

}  // namespace stepcert
