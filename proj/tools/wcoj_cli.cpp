#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wcoj/wcoj.h"

namespace {

// Raised with a status that becomes the exit code.
struct Failure {
  int code;
  std::string message;
};

void check(wcoj_status s) {
  if (s != WCOJ_OK) throw Failure{static_cast<int>(s), wcoj_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{WCOJ_IO_ERROR, "cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Failure{WCOJ_IO_ERROR, "cannot write " + path};
}

struct Database {
  wcoj_database* db = nullptr;
  explicit Database(const std::string& path) { check(wcoj_database_open(path.c_str(), &db)); }
  ~Database() { wcoj_database_free(db); }
};

struct Result {
  wcoj_result* r = nullptr;
  ~Result() { wcoj_result_free(r); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { wcoj_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

struct Toggles {
  std::string engine = "wcoj";
  std::string layout = "auto";
  std::string attr_reorder = "on";
  std::string ghd_pushdown = "on";
  std::string pipeline = "on";
  unsigned threads = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--engine", engine, "wcoj or pairwise")->check(CLI::IsMember({"wcoj", "pairwise"}));
    cmd->add_option("--layout", layout, "set layout")->check(CLI::IsMember({"auto", "uint", "bitset"}));
    const auto on_off = CLI::IsMember({"on", "off"});
    cmd->add_option("--attr-reorder", attr_reorder, "attribute reordering")->check(on_off);
    cmd->add_option("--ghd-pushdown", ghd_pushdown, "selection pushdown across nodes")->check(on_off);
    cmd->add_option("--pipeline", pipeline, "pipelining between nodes")->check(on_off);
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
  }

  wcoj_config config() const {
    wcoj_config c;
    wcoj_config_default(&c);
    c.engine = engine == "pairwise" ? WCOJ_ENGINE_PAIRWISE : WCOJ_ENGINE_WCOJ;
    c.layout = layout == "uint" ? WCOJ_LAYOUT_UINT : layout == "bitset" ? WCOJ_LAYOUT_BITSET : WCOJ_LAYOUT_AUTO;
    c.attr_reorder = attr_reorder == "on";
    c.ghd_pushdown = ghd_pushdown == "on";
    c.pipeline = pipeline == "on";
    c.threads = threads;
    return c;
  }
};

// Median of the runs left after dropping one fastest and one slowest.
double trimmed_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.size() >= 3) v = std::vector<double>(v.begin() + 1, v.end() - 1);
  if (v.empty()) return 0;
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case optimal join engine for RDF"};
  app.require_subcommand(1);

  std::string input, output, query_path, stats_path, kind, query_dir;
  std::uint64_t n = 0, seed = 0;
  unsigned repeat = 5;
  Toggles toggles;

  auto* load = app.add_subcommand("load", "Parse triples and write a snapshot");
  load->add_option("file", input, "triple file")->required();
  load->add_option("--out", output, "snapshot path")->required();

  auto* stats = app.add_subcommand("stats", "Print predicate cardinalities");
  stats->add_option("file", input, "snapshot or triple file")->required();

  auto* query = app.add_subcommand("query", "Run a query and print the result TSV");
  query->add_option("db", input, "snapshot or triple file")->required();
  query->add_option("query", query_path, "SPARQL file")->required();
  query->add_option("--stats", stats_path, "write counters as JSON");
  query->add_option("--out", output, "write the result TSV here instead of stdout");
  toggles.add(query);

  auto* explain = app.add_subcommand("explain", "Print the chosen plan");
  explain->add_option("db", input, "snapshot or triple file")->required();
  explain->add_option("query", query_path, "SPARQL file")->required();
  toggles.add(explain);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("kind", kind, "lubm_like, adversarial_triangle or uniform_random")
      ->required()
      ->check(CLI::IsMember({"lubm_like", "adversarial_triangle", "uniform_random"}));
  gen->add_option("N", n, "scale")->required();
  gen->add_option("seed", seed, "seed")->required();
  gen->add_option("--out", output, "triple file")->required();

  auto* bench = app.add_subcommand("bench", "Time every query in a directory");
  bench->add_option("db", input, "snapshot or triple file")->required();
  bench->add_option("dir", query_dir, "directory of .sparql files")->required();
  bench->add_option("--repeat", repeat, "runs per query")->check(CLI::Range(1u, 1000u));
  toggles.add(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*load) {
      Database db(input);
      check(wcoj_database_save(db.db, output.c_str()));
      std::cerr << "loaded " << wcoj_database_triple_count(db.db) << " triples\n";
    } else if (*stats) {
      Database db(input);
      OwnedString s;
      check(wcoj_database_stats_tsv(db.db, &s.s));
      std::cout << s.str();
    } else if (*query) {
      const std::string text = read_file(query_path);
      Database db(input);
      const wcoj_config cfg = toggles.config();
      Result r;
      check(wcoj_query(db.db, text.c_str(), &cfg, &r.r));
      OwnedString tsv;
      check(wcoj_result_tsv(r.r, &tsv.s));
      if (output.empty()) {
        std::cout << tsv.str();
      } else {
        write_file(output, tsv.str());
      }
      if (!stats_path.empty()) {
        OwnedString js;
        check(wcoj_result_stats_json(r.r, &js.s));
        write_file(stats_path, js.str() + "\n");
      }
    } else if (*explain) {
      const std::string text = read_file(query_path);
      Database db(input);
      const wcoj_config cfg = toggles.config();
      OwnedString plan;
      check(wcoj_explain(db.db, text.c_str(), &cfg, &plan.s));
      std::cout << plan.str();
    } else if (*gen) {
      check(wcoj_generate(kind.c_str(), n, seed, output.c_str()));
    } else if (*bench) {
      std::vector<std::filesystem::path> files;
      std::error_code ec;
      for (const auto& e : std::filesystem::directory_iterator(query_dir, ec)) {
        if (e.path().extension() == ".sparql") files.push_back(e.path());
      }
      if (ec) throw Failure{WCOJ_IO_ERROR, "cannot list " + query_dir + ": " + ec.message()};
      std::sort(files.begin(), files.end());
      Database db(input);
      const wcoj_config cfg = toggles.config();
      std::cout << "query\trows\tmedian_ms\n";
      for (const auto& f : files) {
        const std::string text = read_file(f.string());
        std::vector<double> ms;
        std::uint64_t rows = 0;
        for (unsigned k = 0; k < repeat; ++k) {
          Result r;
          check(wcoj_query(db.db, text.c_str(), &cfg, &r.r));
          wcoj_stats s;
          check(wcoj_result_stats(r.r, &s));
          rows = wcoj_result_rows(r.r);
          ms.push_back(static_cast<double>(s.wall_time_us) / 1000.0);
        }
        std::printf("%s\t%llu\t%.3f\n", f.stem().string().c_str(), static_cast<unsigned long long>(rows),
                    trimmed_median(ms));
      }
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  return 0;
}
