#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "seqslam/error.hpp"
#include "seqslam/matching.hpp"
#include "support.hpp"

using namespace seqslam;
using seqslam::test::random_template;

namespace {

Template make_template(int rx, int ry, std::vector<double> values, std::size_t index = 0) {
    return Template{rx, ry, std::move(values), index};
}

TemplateStore random_store(std::size_t count, std::mt19937_64& rng, int rx = 16, int ry = 8) {
    TemplateStore store(rx, ry, 8);
    for (std::size_t k = 0; k < count; ++k) {
        store.learn(random_template(rx, ry, rng, k));
    }
    return store;
}

double sample_z(const std::vector<double>& d, std::size_t k, int n) {
    const std::size_t lo = k >= static_cast<std::size_t>(n) ? k - n : 0;
    const std::size_t hi = std::min(d.size() - 1, k + n);
    double mean = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
        mean += d[j];
    }
    const double m = static_cast<double>(hi - lo + 1);
    mean /= m;
    double sq = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
        sq += (d[j] - mean) * (d[j] - mean);
    }
    return (d[k] - mean) / std::sqrt(sq / (m - 1));
}

DifferenceVector vec(std::size_t index, std::vector<double> scores) { return DifferenceVector{index, std::move(scores)}; }

} // namespace

TEST_CASE("sad_difference oracles") {
    const Template a = make_template(2, 1, {0, 1});
    const Template b = make_template(2, 1, {1, 0});
    CHECK(sad_difference(a, b) == 1.0);
    CHECK(sad_difference(a, a) == 0.0);
    CHECK(sad_difference(make_template(2, 2, {1, 2, 3, 4}), make_template(2, 2, {2, 2, 0, 8})) == 2.0);
}

TEST_CASE("sad_difference is a metric on random templates") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        const Template a = random_template(8, 8, rng);
        const Template b = random_template(8, 8, rng);
        const Template c = random_template(8, 8, rng);
        const double ab = sad_difference(a, b), ba = sad_difference(b, a);
        CHECK(ab > 0.0);
        CHECK(ab == ba);
        CHECK(sad_difference(a, c) <= ab + sad_difference(b, c) + 1e-12);
    }
}

TEST_CASE("sad_difference rejects dimension mismatches") {
    CHECK_THROWS_AS(sad_difference(make_template(2, 1, {0, 1}), make_template(1, 2, {0, 1})), InvalidInput);
    CHECK_THROWS_AS(sad_difference(make_template(2, 1, {0, 1}), make_template(2, 1, {0})), InvalidInput);
}

TEST_CASE("template store learning rules") {
    std::mt19937_64 rng(1);
    TemplateStore store(16, 8, 8);
    CHECK(store.empty());
    store.learn(random_template(16, 8, rng, 0));
    CHECK(store.size() == 1);
    CHECK_THROWS_AS(store.learn(random_template(16, 8, rng, 5)), InvalidInput);
    CHECK_THROWS_AS(store.learn(random_template(8, 8, rng, 1)), InvalidInput);
    CHECK_THROWS_AS(store.at(1), InvalidInput);
    CHECK_THROWS_AS(TemplateStore(12, 8, 8), InvalidInput);
    CHECK_THROWS_AS(TemplateStore(0, 8, 8), InvalidInput);
}

TEST_CASE("difference_vector oracles") {
    TemplateStore one(8, 8, 8);
    std::mt19937_64 rng(2);
    Template t = random_template(8, 8, rng, 0);
    one.learn(t);
    // A template compared with its own stored copy is exactly zero.
    CHECK(difference_vector(one, one.at(0)).scores == std::vector<double>{0.0});

    TemplateStore hot(8, 8, 8);
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> v(64, 0.0);
        v[k] = 1.0;
        hot.learn(make_template(8, 8, v, k));
    }
    const auto d = difference_vector(hot, hot.at(1));
    CHECK(d.scores[1] == 0.0);
    CHECK(d.scores[0] > 0.0);
    CHECK(d.scores[2] > 0.0);
    CHECK(d.scores[0] == doctest::Approx(2.0 / 64));
}

TEST_CASE("difference_vector length follows the store and edge cases") {
    std::mt19937_64 rng(3);
    TemplateStore store(16, 8, 8);
    const Template q = random_template(16, 8, rng, 0);
    CHECK(difference_vector(store, q).scores.empty());
    for (std::size_t k = 0; k < 5; ++k) {
        store.learn(random_template(16, 8, rng, k));
        CHECK(difference_vector(store, q).scores.size() == k + 1);
    }
    CHECK_THROWS_AS(difference_vector(store, random_template(8, 8, rng)), InvalidInput);
}

TEST_CASE("difference_vector is thread count independent and order preserving") {
    std::mt19937_64 rng(4);
    std::vector<Template> refs;
    for (std::size_t k = 0; k < 37; ++k) {
        refs.push_back(random_template(16, 8, rng, k));
    }
    TemplateStore store(16, 8, 8);
    for (const auto& r : refs) {
        store.learn(r);
    }
    const Template q = random_template(16, 8, rng, 99);
    const auto serial = difference_vector(store, q, 1);
    for (unsigned threads : {2u, 3u, 8u, 64u}) {
        CHECK(difference_vector(store, q, threads) == serial);
    }

    std::vector<std::size_t> perm(refs.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    TemplateStore permuted(16, 8, 8);
    for (std::size_t k = 0; k < perm.size(); ++k) {
        Template t = refs[perm[k]];
        t.source_index = k;
        permuted.learn(t);
    }
    const auto shuffled = difference_vector(permuted, q);
    for (std::size_t k = 0; k < perm.size(); ++k) {
        CHECK(shuffled.scores[k] == serial.scores[perm[k]]);
    }
}

TEST_CASE("store and span comparisons agree bit for bit") {
    std::mt19937_64 rng(5);
    const TemplateStore store = random_store(20, rng);
    std::vector<Template> widened;
    for (std::size_t k = 0; k < store.size(); ++k) {
        widened.push_back(store.at(k));
    }
    const Template q = random_template(16, 8, rng);
    CHECK(difference_vector(store, q).scores == difference_vector(widened, q).scores);
}

TEST_CASE("neighborhood_normalize oracles") {
    SUBCASE("constant vector maps to zeros") {
        CHECK(neighborhood_normalize(vec(0, {5, 5, 5, 5}), 2).scores == std::vector<double>{0, 0, 0, 0});
    }
    SUBCASE("spike with N=2") {
        const std::vector<double> d{0, 0, 10, 0, 0};
        const auto out = neighborhood_normalize(vec(3, d), 2).scores;
        // Whole vector window at the centre: mean 2, sample sd sqrt(80/4) = sqrt(20).
        CHECK(out[2] == doctest::Approx(8.0 / std::sqrt(20.0)).epsilon(1e-12));
        CHECK(out[2] > 0);
        CHECK(out[0] < 0);
        CHECK(out[1] < 0);
        CHECK(out[3] < 0);
        CHECK(out[4] < 0);
        // Clipped window [0..2] for element 0: mean 10/3, divisor 2.
        const double mean0 = 10.0 / 3.0;
        const double sd0 = std::sqrt((2 * mean0 * mean0 + (10 - mean0) * (10 - mean0)) / 2.0);
        CHECK(out[0] == doctest::Approx(-mean0 / sd0).epsilon(1e-12));
        for (std::size_t k = 0; k < d.size(); ++k) {
            CHECK(out[k] == doctest::Approx(sample_z(d, k, 2)).epsilon(1e-12));
        }
    }
    SUBCASE("short vectors pass through") {
        CHECK(neighborhood_normalize(vec(0, {}), 3).scores.empty());
        CHECK(neighborhood_normalize(vec(0, {4.5}), 3).scores == std::vector<double>{4.5});
    }
    SUBCASE("invalid half window") { CHECK_THROWS_AS(neighborhood_normalize(vec(0, {1, 2}), 0), InvalidInput); }
}

TEST_CASE("neighborhood_normalize matches the window oracle and is affine invariant") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 3.0), gain(0.01, 100.0), offset(-50.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> d(40);
        for (auto& v : d) {
            v = u(rng);
        }
        const int n = 1 + static_cast<int>(rng() % 6);
        const auto out = neighborhood_normalize(vec(0, d), n).scores;
        const double a = gain(rng), b = offset(rng);
        std::vector<double> t(d.size());
        std::transform(d.begin(), d.end(), t.begin(), [&](double v) { return a * v + b; });
        const auto shifted = neighborhood_normalize(vec(0, t), n).scores;
        for (std::size_t k = static_cast<std::size_t>(n); k + n < d.size(); ++k) {
            CHECK(std::abs(out[k] - sample_z(d, k, n)) <= 1e-9);
            CHECK(std::abs(out[k] - shifted[k]) <= 1e-9);
        }
    }
}

TEST_CASE("difference matrix window and padding") {
    DifferenceMatrix m(3);
    CHECK_THROWS_AS(DifferenceMatrix(0), InvalidInput);

    m.push_column(vec(0, {1, 2, 3}));
    CHECK(m.columns() == 1);
    CHECK_FALSE(m.full());
    m.push_column(vec(1, {1, 2, 3, 4}));
    m.push_column(vec(2, {1, 2, 3, 4, 5}));
    CHECK(m.full());
    CHECK(m.rows() == 5);
    CHECK(m.column_length(0) == 3);
    CHECK(DifferenceMatrix::is_pad(m.at(3, 0)));
    CHECK(DifferenceMatrix::is_pad(m.at(4, 0)));
    CHECK(DifferenceMatrix::is_pad(m.at(4, 1)));
    CHECK_FALSE(DifferenceMatrix::is_pad(m.at(3, 1)));
    CHECK(m.at(4, 2) == 5.0);

    m.push_column(vec(3, {1, 2, 3, 4, 5, 6}));
    CHECK(m.columns() == 3);
    CHECK(m.frame_index(0) == 1);
    CHECK(m.frame_index(2) == 3);
    CHECK(m.rows() == 6);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(DifferenceMatrix::is_pad(m.at(5, c)));
    }

    CHECK_THROWS_AS(m.push_column(vec(5, {1})), InvalidInput);
    CHECK_THROWS_AS(m.push_column(vec(3, {1})), InvalidInput);
}

TEST_CASE("difference matrix holds min(frames, n) columns") {
    DifferenceMatrix m(4);
    for (std::size_t f = 0; f < 10; ++f) {
        m.push_column(vec(f, std::vector<double>(f + 1, 0.5)));
        CHECK(m.columns() == std::min<std::size_t>(f + 1, 4));
        // Pads only ever sit at the tail of a column.
        for (std::size_t c = 0; c < m.columns(); ++c) {
            for (std::size_t r = 0; r < m.rows(); ++r) {
                CHECK(DifferenceMatrix::is_pad(m.at(r, c)) == (r >= m.column_length(c)));
            }
        }
    }
}

TEST_CASE("template store persistence is bit exact") {
    std::mt19937_64 rng(7);
    TemplateStore store = random_store(12, rng);
    std::ostringstream out;
    write_store(out, store);
    const std::string bytes = out.str();
    CHECK(bytes.size() == 24 + 12 * 16 * 8 * 4);
    CHECK(bytes.substr(0, 4) == "SQSM");
    CHECK(bytes[4] == 1);

    std::istringstream in(bytes);
    const TemplateStore back = read_store(in);
    CHECK(back == store);
    std::ostringstream again;
    write_store(again, back);
    CHECK(again.str() == bytes);

    test::TempDir dir("store");
    save_store(dir / "s.sqsm", store);
    CHECK(load_store(dir / "s.sqsm") == store);
    CHECK(test::slurp(dir / "s.sqsm") == bytes);

    SUBCASE("special values survive") {
        TemplateStore special(8, 8, 8);
        std::vector<double> v(64, 0.0);
        v[0] = -0.0;
        v[1] = std::numeric_limits<float>::denorm_min();
        v[2] = std::numeric_limits<float>::max();
        special.learn(make_template(8, 8, v));
        std::ostringstream o;
        write_store(o, special);
        std::istringstream i(o.str());
        const TemplateStore r = read_store(i);
        CHECK(std::signbit(r.values(0)[0]));
        CHECK(r.values(0)[1] == std::numeric_limits<float>::denorm_min());
    }
}

TEST_CASE("template store rejects corrupt files") {
    std::mt19937_64 rng(8);
    std::ostringstream out;
    write_store(out, random_store(3, rng));
    const std::string good = out.str();

    auto load = [](std::string bytes) {
        std::istringstream in(bytes);
        return read_store(in);
    };
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(load(bad_magic), IoError);
    std::string bad_version = good;
    bad_version[4] = 2;
    CHECK_THROWS_AS(load(bad_version), IoError);
    CHECK_THROWS_AS(load(good.substr(0, good.size() - 1)), IoError);
    CHECK_THROWS_AS(load(good.substr(0, 10)), IoError);
    std::string bad_patch = good;
    bad_patch[16] = 3;
    CHECK_THROWS_AS(load(bad_patch), IoError);
    test::TempDir dir("store_err");
    CHECK_THROWS_AS(load_store(dir / "missing.sqsm"), IoError);
}
