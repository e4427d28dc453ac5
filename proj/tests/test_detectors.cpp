#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "curie/detectors.hpp"
#include "curie/rng.hpp"

using namespace curie;

namespace {

// Wire encoding used by the evaluation loop: kErrorSignal on an error.
double wire(bool error) { return error ? kErrorSignal : kCorrectSignal; }

// Bernoulli error stream of the given rate, then a switched rate.
std::vector<double> error_jump_stream(Rng& rng, int before, double p_before, int after,
                                      double p_after) {
  std::vector<double> stream;
  for (int i = 0; i < before; ++i) stream.push_back(wire(rng.bernoulli(p_before)));
  for (int i = 0; i < after; ++i) stream.push_back(wire(rng.bernoulli(p_after)));
  return stream;
}

}  // namespace

TEST_CASE("DDM stays quiet on an error-free stream") {
  Ddm ddm;
  for (int i = 0; i < 1000; ++i) {
    CHECK(ddm.add_element(wire(false)) == Verdict::kNoChange);
  }
  CHECK(!ddm.detected_change());
}

TEST_CASE("DDM catches a 0.1 -> 0.5 error-rate jump quickly, over seeds") {
  // Detector reset after every alarm, as the evaluation loop does.
  int detected_within_300 = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const auto stream = error_jump_stream(rng, 500, 0.1, 400, 0.5);
    Ddm ddm;
    for (int t = 0; t < static_cast<int>(stream.size()); ++t) {
      if (ddm.add_element(stream[static_cast<std::size_t>(t)]) == Verdict::kDrift) {
        if (t >= 500 && t < 800) {
          ++detected_within_300;
          break;
        }
        ddm.reset();
      }
    }
  }
  CHECK(detected_within_300 >= 19);
}

TEST_CASE("DDM warning precedes drift on a slow deterioration") {
  Rng rng(77);
  Ddm ddm;
  bool warned = false;
  bool drifted = false;
  for (int t = 0; t < 3000 && !drifted; ++t) {
    const double p = t < 1000 ? 0.1 : 0.1 + 0.4 * std::min(1.0, (t - 1000) / 500.0);
    const Verdict v = ddm.add_element(wire(rng.bernoulli(p)));
    if (v == Verdict::kWarning) warned = true;
    if (v == Verdict::kDrift) drifted = true;
  }
  CHECK(warned);
  CHECK(drifted);
}

TEST_CASE("binary detectors reject non-binary input") {
  Ddm ddm;
  Eddm eddm;
  CHECK_THROWS_AS(ddm.add_element(0.5), std::invalid_argument);
  CHECK_THROWS_AS(eddm.add_element(-1.0), std::invalid_argument);
}

TEST_CASE("EDDM emits no verdict before two errors and the warm-up") {
  Eddm eddm;
  CHECK(eddm.add_element(wire(true)) == Verdict::kNoChange);  // first error
  for (int i = 0; i < 100; ++i) CHECK(eddm.add_element(wire(false)) == Verdict::kNoChange);
  // Second error arrives after min_num_instances: statistics now defined,
  // and a single long distance cannot undercut its own maximum.
  CHECK(eddm.add_element(wire(true)) == Verdict::kNoChange);
}

TEST_CASE("EDDM fires when the error spacing collapses") {
  Eddm eddm;
  // Errors every 40 steps establish a wide spacing...
  for (int block = 0; block < 20; ++block) {
    for (int i = 0; i < 39; ++i) REQUIRE(eddm.add_element(wire(false)) == Verdict::kNoChange);
    eddm.add_element(wire(true));
  }
  // ...then errors every step collapse it.
  bool drifted = false;
  for (int i = 0; i < 200 && !drifted; ++i) {
    drifted = eddm.add_element(wire(true)) == Verdict::kDrift;
  }
  CHECK(drifted);
}

TEST_CASE("ADWIN detects a large mean shift on unit-bounded input") {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(42 + seed);
    Adwin adwin(0.002);
    bool detected = false;
    for (int t = 0; t < 2000; ++t) {
      const double v = t < 1000 ? (rng.bernoulli(0.2) ? 1.0 : 0.0)
                                : (rng.bernoulli(0.8) ? 1.0 : 0.0);
      if (adwin.add_element(v) == Verdict::kDrift) {
        CHECK(t >= 1000);  // no alarm before the shift on these seeds
        detected = true;
        break;
      }
    }
    CHECK(detected);
  }
}

TEST_CASE("ADWIN drops the stale window head after a shift") {
  Rng rng(7);
  Adwin adwin(0.002);
  for (int t = 0; t < 1000; ++t) adwin.add_element(rng.bernoulli(0.2) ? 1.0 : 0.0);
  const std::int64_t width_before = adwin.width();
  CHECK(width_before == 1000);
  for (int t = 0; t < 1000; ++t) adwin.add_element(rng.bernoulli(0.8) ? 1.0 : 0.0);
  CHECK(adwin.width() < 1500);  // old regime largely evicted
  CHECK(adwin.mean() > 0.6);
}

TEST_CASE("ADWIN window mean matches the retained-suffix oracle") {
  Rng rng(11);
  Adwin adwin(0.002);
  std::deque<double> fed;
  double max_rel_err = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const double v = t < 5000 ? rng.uniform01() * 0.5 : 0.5 + rng.uniform01() * 0.5;
    adwin.add_element(v);
    fed.push_back(v);
    while (static_cast<std::int64_t>(fed.size()) > adwin.width()) fed.pop_front();
    double sum = 0.0;
    for (double x : fed) sum += x;
    const double oracle = sum / static_cast<double>(fed.size());
    if (oracle != 0.0) {
      max_rel_err = std::max(max_rel_err, std::abs(adwin.mean() - oracle) / std::abs(oracle));
    }
  }
  CHECK(max_rel_err <= 1e-9);
}

TEST_CASE("ADWIN keeps at most M+1 buckets per row") {
  Rng rng(13);
  Adwin adwin(0.002);
  for (int t = 0; t < 5000; ++t) {
    adwin.add_element(rng.uniform01());
    for (int count : adwin.bucket_counts_per_row()) CHECK(count <= 6);
  }
}

TEST_CASE("ADWIN false alarms on stationary data are rare") {
  int alarms = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(500 + seed);
    Adwin adwin(0.002);
    for (int t = 0; t < 2000; ++t) {
      if (adwin.add_element(rng.bernoulli(0.5) ? 1.0 : 0.0) == Verdict::kDrift) ++alarms;
    }
  }
  CHECK(alarms <= 1);
}

TEST_CASE("Page-Hinkley never fires on constant input") {
  PageHinkley ph;
  for (int i = 0; i < 5000; ++i) {
    CHECK(ph.add_element(0.7) == Verdict::kNoChange);
  }
}

TEST_CASE("Page-Hinkley fires after a 0 -> 1 step in the input") {
  PageHinkley ph;
  for (int i = 0; i < 500; ++i) REQUIRE(ph.add_element(0.0) == Verdict::kNoChange);
  bool drifted = false;
  int when = 0;
  for (int i = 0; i < 500 && !drifted; ++i) {
    drifted = ph.add_element(1.0) == Verdict::kDrift;
    when = i;
  }
  CHECK(drifted);
  CHECK(when < 120);  // threshold 50 over ~unit increments
}

TEST_CASE("detected_change is edge-triggered and cleared by reading") {
  PageHinkley ph;
  CHECK(!ph.detected_change());  // immediately after construction
  for (int i = 0; i < 500; ++i) ph.add_element(0.0);
  Verdict v = Verdict::kNoChange;
  for (int i = 0; i < 500 && v != Verdict::kDrift; ++i) v = ph.add_element(1.0);
  REQUIRE(v == Verdict::kDrift);
  CHECK(ph.detected_change());
  CHECK(!ph.detected_change());  // cleared by the read, no new input
  ph.add_element(1.0);           // still past threshold: drifting again
  CHECK(ph.detected_change());
  ph.reset();
  CHECK(!ph.detected_change());  // cleared by reset
}

TEST_CASE("reset restores fresh-construction behavior (twin-run equivalence)") {
  Rng rng(31);
  std::vector<double> warm;
  for (int i = 0; i < 600; ++i) warm.push_back(wire(rng.bernoulli(0.3)));
  std::vector<double> probe;
  for (int i = 0; i < 600; ++i) probe.push_back(wire(rng.bernoulli(0.1)));
  for (int i = 0; i < 400; ++i) probe.push_back(wire(rng.bernoulli(0.6)));

  const auto twin_check = [&](auto make) {
    auto used = make();
    for (double v : warm) used->add_element(v);
    used->reset();
    auto fresh = make();
    for (double v : probe) {
      CHECK(used->add_element(v) == fresh->add_element(v));
    }
  };
  twin_check([] { return std::make_unique<Ddm>(); });
  twin_check([] { return std::make_unique<Eddm>(); });
  twin_check([] { return std::make_unique<Adwin>(); });
  twin_check([] { return std::make_unique<PageHinkley>(); });
}

TEST_CASE("determinism: equal input sequences give equal verdict sequences") {
  Rng rng(61);
  std::vector<double> stream;
  for (int i = 0; i < 1500; ++i) stream.push_back(wire(rng.bernoulli(i < 700 ? 0.15 : 0.5)));
  Ddm a;
  Ddm b;
  for (double v : stream) CHECK(a.add_element(v) == b.add_element(v));
}

TEST_CASE("SignalMapping pins which wire value is the error") {
  // With the default mapping, 0 means misclassification: a run of zeros is
  // a 100% error rate and the distance between errors is 1.
  Ddm ddm;
  Verdict last = Verdict::kNoChange;
  for (int i = 0; i < 200; ++i) last = ddm.add_element(wire(true));
  CHECK(last == Verdict::kNoChange);  // constant full-error rate never rises
  constexpr SignalMapping mapping;
  CHECK(mapping.is_error(0.0));
  CHECK(!mapping.is_error(1.0));
}
