#include "wcoj/generator.hpp"

#include <random>
#include <set>
#include <string>

#include "wcoj/error.hpp"

namespace wcoj {
namespace {

// Uniform draws by modulo so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : gen_() % n; }
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

 private:
  std::mt19937_64 gen_;
};

constexpr std::uint64_t kDepartmentsPerUniversity = 15;
constexpr std::uint64_t kUniversityRange = 1000;

struct DepartmentShape {
  std::uint64_t full = 3;
  std::uint64_t associate = 3;
  std::uint64_t assistant = 4;
  std::uint64_t undergrads = 20;
  std::uint64_t grads = 8;
  std::uint64_t courses = 20;
  std::uint64_t grad_courses = 10;
  std::uint64_t publications = 200;
  std::uint64_t groups = 3;
};

class LubmWriter {
 public:
  LubmWriter(std::vector<RawTriple>& out, Rng& rng) : out_(out), rng_(rng) {}

  void department(std::uint64_t index) {
    const std::uint64_t u = index / kDepartmentsPerUniversity;
    const std::uint64_t d = index % kDepartmentsPerUniversity;
    const std::string univ = university(u);
    const std::string dept = "http://www.Department" + std::to_string(d) + ".University" +
                             std::to_string(u) + ".edu";
    const std::string host = "Department" + std::to_string(d) + ".University" + std::to_string(u) + ".edu";
    const DepartmentShape s;
    typed(univ, "University");
    typed(dept, "Department");
    ub(dept, "subOrganizationOf", univ);
    ub(dept, "name", "Department" + std::to_string(d));

    for (std::uint64_t g = 0; g < s.groups; ++g) {
      const std::string group = dept + "/ResearchGroup" + std::to_string(g);
      typed(group, "ResearchGroup");
      ub(group, "subOrganizationOf", dept);
      if (g == 0) ub(group, "subOrganizationOf", univ);
    }

    std::vector<std::string> courses;
    std::vector<std::string> grad_courses;
    for (std::uint64_t c = 0; c < s.courses; ++c) {
      courses.push_back(dept + "/Course" + std::to_string(c));
      typed(courses.back(), "Course");
      ub(courses.back(), "name", "Course" + std::to_string(c));
    }
    for (std::uint64_t c = 0; c < s.grad_courses; ++c) {
      grad_courses.push_back(dept + "/GraduateCourse" + std::to_string(c));
      typed(grad_courses.back(), "GraduateCourse");
      ub(grad_courses.back(), "name", "GraduateCourse" + std::to_string(c));
    }

    // Faculty; course c is taught by faculty member c mod |faculty|.
    std::vector<std::string> faculty;
    std::vector<std::string> assistants;
    std::vector<std::vector<std::size_t>> teaches;
    auto add_faculty = [&](const char* kind, std::uint64_t count) {
      for (std::uint64_t i = 0; i < count; ++i) {
        const std::string local = kind + std::to_string(i);
        const std::string who = dept + "/" + local;
        person(who, kind, local, host);
        ub(who, "worksFor", dept);
        ub(who, "undergraduateDegreeFrom", university(rng_.below(kUniversityRange)));
        if (std::string_view(kind) == "AssistantProfessor") assistants.push_back(who);
        faculty.push_back(who);
      }
    };
    add_faculty("FullProfessor", s.full);
    add_faculty("AssociateProfessor", s.associate);
    add_faculty("AssistantProfessor", s.assistant);
    teaches.resize(faculty.size());
    // AssociateProfessor0 teaches Course0 so its teaching query has answers.
    const std::size_t assoc0 = s.full;
    for (std::size_t c = 0; c < courses.size(); ++c) {
      const std::size_t f = c == 0 ? assoc0 : c % faculty.size();
      ub(faculty[f], "teacherOf", courses[c]);
      teaches[f].push_back(c);
    }
    for (std::size_t c = 0; c < grad_courses.size(); ++c) {
      ub(faculty[c % faculty.size()], "teacherOf", grad_courses[c]);
    }

    for (std::uint64_t i = 0; i < s.undergrads; ++i) {
      const std::string local = "UndergraduateStudent" + std::to_string(i);
      const std::string who = dept + "/" + local;
      person(who, "UndergraduateStudent", local, host);
      ub(who, "memberOf", dept);
      std::set<std::size_t> taken;
      if (i == 0) taken.insert(0);
      const std::uint64_t k = 2 + rng_.below(3);
      while (taken.size() < k) taken.insert(rng_.below(courses.size()));
      if (rng_.chance(1, 2)) {
        const std::size_t a = rng_.below(assistants.size());
        ub(who, "advisor", assistants[a]);
        // Take one course of the advisor as well.
        const auto& own = teaches[s.full + s.associate + a];
        if (!own.empty()) taken.insert(own[rng_.below(own.size())]);
      }
      for (auto c : taken) ub(who, "takesCourse", courses[c]);
    }

    std::vector<std::string> grads;
    for (std::uint64_t i = 0; i < s.grads; ++i) {
      const std::string local = "GraduateStudent" + std::to_string(i);
      const std::string who = dept + "/" + local;
      grads.push_back(who);
      person(who, "GraduateStudent", local, host);
      ub(who, "memberOf", dept);
      std::uint64_t from = u;
      if ((index * s.grads + i) % 7 == 0) {
        from = 567;
      } else if (!rng_.chance(1, 2)) {
        from = rng_.below(kUniversityRange);
      }
      ub(who, "undergraduateDegreeFrom", university(from));
      std::set<std::size_t> taken;
      if (i == 0) taken.insert(0);
      const std::uint64_t k = 1 + rng_.below(3);
      while (taken.size() < k) taken.insert(rng_.below(grad_courses.size()));
      for (auto c : taken) ub(who, "takesCourse", grad_courses[c]);
      ub(who, "advisor", faculty[rng_.below(faculty.size())]);
    }

    // AssistantProfessor0 authors publication 0.
    const std::size_t asst0 = s.full + s.associate;
    for (std::uint64_t p = 0; p < s.publications; ++p) {
      const std::string pub = dept + "/Publication" + std::to_string(p);
      typed(pub, "Publication");
      ub(pub, "name", "Publication" + std::to_string(p));
      const std::size_t pool = faculty.size() + grads.size();
      const std::size_t a = p == 0 ? asst0 : rng_.below(pool);
      ub(pub, "publicationAuthor", a < faculty.size() ? faculty[a] : grads[a - faculty.size()]);
      if (rng_.chance(1, 3)) {
        const std::size_t b = rng_.below(pool);
        if (b != a) ub(pub, "publicationAuthor", b < faculty.size() ? faculty[b] : grads[b - faculty.size()]);
      }
    }
  }

 private:
  std::string university(std::uint64_t u) {
    std::string iri = "http://www.University" + std::to_string(u) + ".edu";
    if (typed_universities_.insert(u).second) {
      typed(iri, "University");
      ub(iri, "name", "University" + std::to_string(u));
    }
    return iri;
  }

  void person(const std::string& who, const std::string& kind, const std::string& local,
              const std::string& host) {
    typed(who, kind);
    ub(who, "name", local);
    ub(who, "emailAddress", local + "@" + host);
    ub(who, "telephone", std::to_string(100 + rng_.below(900)) + "-" +
                             std::to_string(100 + rng_.below(900)) + "-" +
                             std::to_string(1000 + rng_.below(9000)));
  }

  void typed(const std::string& s, const std::string& cls) {
    out_.push_back({s, std::string(kRdfTypeIri), std::string(kUbPrefix) + cls});
  }
  void ub(const std::string& s, const std::string& p, const std::string& o) {
    out_.push_back({s, std::string(kUbPrefix) + p, o});
  }

  std::vector<RawTriple>& out_;
  Rng& rng_;
  std::set<std::uint64_t> typed_universities_;
};

}  // namespace

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
  if (name == "lubm_like") return DatasetKind::LubmLike;
  if (name == "adversarial_triangle") return DatasetKind::AdversarialTriangle;
  if (name == "uniform_random") return DatasetKind::UniformRandom;
  return std::nullopt;
}

std::string_view dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::LubmLike:
      return "lubm_like";
    case DatasetKind::AdversarialTriangle:
      return "adversarial_triangle";
    case DatasetKind::UniformRandom:
      return "uniform_random";
  }
  return "";
}

std::vector<RawTriple> generate_lubm_like(std::uint64_t n, std::uint64_t seed) {
  std::vector<RawTriple> out;
  Rng rng(seed);
  LubmWriter writer(out, rng);
  for (std::uint64_t d = 0; out.size() < n; ++d) writer.department(d);
  return out;
}

std::vector<RawTriple> generate_adversarial_triangle(std::uint64_t n) {
  std::vector<RawTriple> out;
  const std::string base(kAdversarialPrefix);
  const std::string hub = base + "h";
  const std::uint64_t left = n / 2;
  for (const char* p : {"p", "q", "r"}) {
    const std::string pred = base + p;
    for (std::uint64_t i = 0; i < left; ++i) out.push_back({base + "s" + std::to_string(i), pred, hub});
    for (std::uint64_t j = 0; j < n - left; ++j) out.push_back({hub, pred, base + "t" + std::to_string(j)});
  }
  return out;
}

std::vector<RawTriple> generate_uniform_random(std::uint64_t n, std::uint64_t seed,
                                               const UniformVocabulary& vocab) {
  const std::uint64_t subjects = vocab.subjects ? vocab.subjects : std::max<std::uint64_t>(1, n / 10);
  const std::uint64_t objects = vocab.objects ? vocab.objects : std::max<std::uint64_t>(1, n / 10);
  const std::uint64_t predicates = std::max<std::uint64_t>(1, vocab.predicates);
  const std::string base = "http://example.org/random/";
  Rng rng(seed);
  std::vector<RawTriple> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto s = rng.below(subjects);
    const auto p = rng.below(predicates);
    const auto o = rng.below(objects);
    out.push_back({base + "n" + std::to_string(s), base + "p" + std::to_string(p),
                   base + "n" + std::to_string(o)});
  }
  return out;
}

std::vector<RawTriple> generate(DatasetKind kind, std::uint64_t n, std::uint64_t seed) {
  switch (kind) {
    case DatasetKind::LubmLike:
      return generate_lubm_like(n, seed);
    case DatasetKind::AdversarialTriangle:
      return generate_adversarial_triangle(n);
    case DatasetKind::UniformRandom:
      return generate_uniform_random(n, seed);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown dataset kind");
}

void write_triples(std::ostream& out, const std::vector<RawTriple>& triples) {
  for (const auto& t : triples) write_triple(out, t);
}

}  // namespace wcoj
