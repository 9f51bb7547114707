#include <catch2/catch_amalgamated.hpp>

#include <fruitgrade/anfis.hpp>
#include <fruitgrade/rng.hpp>

#include <cmath>
#include <set>
#include <utility>

using namespace fruitgrade;
using namespace fruitgrade::anfis;

namespace {

double fis_sse(const FisModel& fis, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    double s = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double e = fis_forward(fis, Eigen::VectorXd(x.row(i))).value - y[i];
        s += e * e;
    }
    return s;
}

} // namespace

TEST_CASE("grid partition on one input places MFs at the range ends") {
    Eigen::VectorXd lo(1), hi(1);
    lo << 0;
    hi << 1;
    auto fis = grid_partition(lo, hi, 2);
    REQUIRE(fis.rules.size() == 2);
    CHECK(fis.rules[0].antecedent[0].center == 0.0);
    CHECK(fis.rules[1].antecedent[0].center == 1.0);
    CHECK(fis.rules[0].antecedent[0].sigma == Catch::Approx(0.5));
}

TEST_CASE("grid partition rule counts and the explosion cap") {
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(7);
    Eigen::VectorXd hi = Eigen::VectorXd::Ones(7);
    auto fis = grid_partition(lo, hi, 2);
    CHECK(fis.rules.size() == 128);
    CHECK_THROWS_AS(grid_partition(lo, hi, 3), std::runtime_error); // 2187 > 512
    CHECK_THROWS_AS(grid_partition(lo, hi, 1), std::invalid_argument);
}

TEST_CASE("grid rules enumerate the full cartesian product") {
    Eigen::VectorXd lo(2), hi(2);
    lo << 0, 10;
    hi << 1, 20;
    auto fis = grid_partition(lo, hi, 3);
    REQUIRE(fis.rules.size() == 9);
    std::set<std::pair<double, double>> combos;
    for (const auto& r : fis.rules)
        combos.insert({r.antecedent[0].center, r.antecedent[1].center});
    CHECK(combos.size() == 9);
}

TEST_CASE("subtractive clustering of a single point returns that point") {
    Eigen::MatrixXd data(1, 2);
    data << 0.3, 0.7;
    auto centers = subtractive_cluster(data);
    REQUIRE(centers.rows() == 1);
    CHECK(centers(0, 0) == 0.3);
    CHECK(centers(0, 1) == 0.7);
    CHECK_THROWS_AS(subtractive_cluster(Eigen::MatrixXd(0, 2)), std::invalid_argument);
}

TEST_CASE("subtractive clustering finds two well-separated clusters") {
    Rng rng(2);
    Eigen::MatrixXd data(100, 2);
    for (int i = 0; i < 50; ++i) {
        data(i, 0) = 0.1 + 0.02 * rng.gaussian();
        data(i, 1) = 0.1 + 0.02 * rng.gaussian();
        data(50 + i, 0) = 0.9 + 0.02 * rng.gaussian();
        data(50 + i, 1) = 0.9 + 0.02 * rng.gaussian();
    }
    auto centers = subtractive_cluster(data, 0.3);
    REQUIRE(centers.rows() == 2);
    for (Eigen::Index c = 0; c < 2; ++c) {
        bool near_a = (centers.row(c) - Eigen::RowVector2d(0.1, 0.1)).norm() < 0.1;
        bool near_b = (centers.row(c) - Eigen::RowVector2d(0.9, 0.9)).norm() < 0.1;
        CHECK((near_a || near_b));
    }
    CHECK((centers.row(0) - centers.row(1)).norm() > 0.5);
}

TEST_CASE("duplicating every data point leaves the centers unchanged") {
    Rng rng(3);
    Eigen::MatrixXd data(40, 2);
    for (int i = 0; i < 40; ++i) {
        data(i, 0) = rng.uniform();
        data(i, 1) = rng.uniform();
    }
    Eigen::MatrixXd doubled(80, 2);
    doubled << data, data;
    auto a = subtractive_cluster(data);
    auto b = subtractive_cluster(doubled);
    REQUIRE(a.rows() == b.rows());
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fcm with one cluster returns the data mean") {
    Rng rng(4);
    Eigen::MatrixXd data(25, 3);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 3; ++j)
            data(i, j) = rng.uniform(-2, 5);
    auto res = fcm(data, 1);
    Eigen::RowVectorXd m = data.colwise().mean();
    CHECK((res.centers.row(0) - m).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((res.membership.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("fcm with two points converges to both points") {
    Eigen::MatrixXd data(2, 1);
    data << 0.0, 1.0;
    auto res = fcm(data, 2, 2.0, 1e-9, 500, 7);
    double c0 = res.centers(0, 0), c1 = res.centers(1, 0);
    CHECK(std::min(c0, c1) == Catch::Approx(0.0).margin(1e-3));
    CHECK(std::max(c0, c1) == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("fcm objective is non-increasing and memberships row-stochastic") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 10 + static_cast<int>(rng.next() % 30);
        int c = 2 + static_cast<int>(rng.next() % 3);
        Eigen::MatrixXd data(n, 2);
        for (int i = 0; i < n; ++i) {
            data(i, 0) = rng.uniform();
            data(i, 1) = rng.uniform();
        }
        auto res = fcm(data, c, 2.0, 1e-6, 60, 100 + static_cast<std::uint64_t>(trial));
        for (std::size_t it = 1; it < res.objective.size(); ++it)
            CHECK(res.objective[it] <= res.objective[it - 1] + 1e-9);
        for (Eigen::Index i = 0; i < res.membership.rows(); ++i)
            CHECK(std::abs(res.membership.row(i).sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("fcm rejects more clusters than points") {
    Eigen::MatrixXd data(3, 1);
    data << 1, 2, 3;
    CHECK_THROWS_AS(fcm(data, 4), std::invalid_argument);
}

TEST_CASE("single-rule FIS fires fully everywhere") {
    Eigen::MatrixXd centers(1, 2);
    centers << 0.5, 0.5;
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    auto fis = fis_from_subtractive(centers, lo, hi);
    fis.rules[0].consequent << 2.0, 0.0, 0.0;
    Eigen::VectorXd x(2);
    x << -3.0, 7.0;
    auto out = fis_forward(fis, x);
    CHECK(out.firings[0] == 1.0);
    CHECK(out.value == Catch::Approx(2.0));
}

TEST_CASE("subtractive rule sigmas follow the radius formula") {
    Eigen::MatrixXd centers(2, 2);
    centers << 0.2, 0.3, 0.8, 0.7;
    Eigen::VectorXd lo(2), hi(2);
    lo << 0, 0;
    hi << 2, 4;
    auto fis = fis_from_subtractive(centers, lo, hi, 0.5);
    CHECK(fis.rules[0].antecedent[0].sigma == Catch::Approx(0.5 * 2.0 / std::sqrt(8.0)));
    CHECK(fis.rules[0].antecedent[1].sigma == Catch::Approx(0.5 * 4.0 / std::sqrt(8.0)));
}

TEST_CASE("dominant rule after clustering matches the point's cluster") {
    Rng rng(6);
    Eigen::MatrixXd data(40, 2);
    for (int i = 0; i < 20; ++i) {
        data(i, 0) = 0.1 + 0.02 * rng.gaussian();
        data(i, 1) = 0.1 + 0.02 * rng.gaussian();
        data(20 + i, 0) = 0.9 + 0.02 * rng.gaussian();
        data(20 + i, 1) = 0.9 + 0.02 * rng.gaussian();
    }
    auto centers = subtractive_cluster(data, 0.3);
    REQUIRE(centers.rows() == 2);
    Eigen::VectorXd lo = data.colwise().minCoeff(), hi = data.colwise().maxCoeff();
    auto fis = fis_from_subtractive(centers, lo, hi, 0.3);
    for (int i = 0; i < 40; ++i) {
        auto out = fis_forward(fis, Eigen::VectorXd(data.row(i)));
        Eigen::Index dominant;
        out.firings.maxCoeff(&dominant);
        Eigen::Index nearest;
        (centers.rowwise() - data.row(i)).rowwise().norm().minCoeff(&nearest);
        CHECK(dominant == nearest);
    }
}

TEST_CASE("fcm rule sigma floor engages on a repeated point") {
    Eigen::MatrixXd data(6, 1);
    data << 0.5, 0.5, 0.5, 0.5, 0.0, 1.0;
    auto res = fcm(data, 2, 2.0, 1e-7, 200, 1);
    auto fis = fis_from_fcm(res, data);
    for (const auto& r : fis.rules)
        CHECK(r.antecedent[0].sigma >= 1e-3 * 1.0);
}

TEST_CASE("normalized firings sum to one") {
    Rng rng(7);
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(3), hi = Eigen::VectorXd::Ones(3);
    auto fis = grid_partition(lo, hi, 2);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd x(3);
        for (int i = 0; i < 3; ++i)
            x[i] = rng.uniform(-2, 3);
        auto out = fis_forward(fis, x);
        CHECK(std::abs(out.firings.sum() - 1.0) < 1e-9);
    }
    // far outside the grid all raw firings underflow; the log-domain path
    // still produces a normalized answer
    Eigen::VectorXd far = Eigen::VectorXd::Constant(3, 1e4);
    auto out = fis_forward(fis, far);
    CHECK(std::abs(out.firings.sum() - 1.0) < 1e-9);
    CHECK(std::isfinite(out.value));
}

TEST_CASE("two symmetric rules split the midpoint evenly") {
    Eigen::MatrixXd centers(2, 1);
    centers << 0.0, 1.0;
    Eigen::VectorXd lo(1), hi(1);
    lo << 0;
    hi << 1;
    auto fis = fis_from_subtractive(centers, lo, hi);
    Eigen::VectorXd x(1);
    x << 0.5;
    auto out = fis_forward(fis, x);
    CHECK(out.firings[0] == Catch::Approx(0.5));
    CHECK(out.firings[1] == Catch::Approx(0.5));
}

TEST_CASE("fis output is invariant under rule permutation") {
    Rng rng(8);
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    auto fis = grid_partition(lo, hi, 2);
    for (auto& r : fis.rules)
        for (int i = 0; i <= 2; ++i)
            r.consequent[i] = rng.uniform(-1, 1);
    FisModel shuffled = fis;
    std::swap(shuffled.rules[0], shuffled.rules[3]);
    std::swap(shuffled.rules[1], shuffled.rules[2]);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x(2);
        x << rng.uniform(), rng.uniform();
        CHECK(fis_forward(fis, x).value ==
              Catch::Approx(fis_forward(shuffled, x).value).epsilon(1e-12));
    }
}

TEST_CASE("consequent LSE is optimal against small perturbations") {
    Rng rng(9);
    Eigen::MatrixXd x(40, 1);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        x(i, 0) = rng.uniform(-1, 1);
        y[i] = std::sin(3 * x(i, 0));
    }
    auto res = fcm(x, 4, 2.0, 1e-6, 100, 2);
    auto fis = fis_from_fcm(res, x);
    solve_consequents_lse(fis, x, y);
    double base = fis_sse(fis, x, y);
    for (std::size_t r = 0; r < fis.rules.size(); ++r) {
        for (int p = 0; p <= 1; ++p) {
            for (double d : {-1e-3, 1e-3}) {
                FisModel pert = fis;
                pert.rules[r].consequent[p] += d;
                CHECK(fis_sse(pert, x, y) >= base - 1e-10);
            }
        }
    }
}

TEST_CASE("premise gradients match central finite differences") {
    Rng rng(10);
    Eigen::MatrixXd x(15, 2);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
        y[i] = x(i, 0) - 0.5 * x(i, 1);
    }
    Eigen::VectorXd lo = x.colwise().minCoeff(), hi = x.colwise().maxCoeff();
    auto fis = grid_partition(lo, hi, 2);
    for (auto& r : fis.rules)
        for (int p = 0; p <= 2; ++p)
            r.consequent[p] = rng.uniform(-1, 1);

    auto loss = [&](const FisModel& f) { return 0.5 * fis_sse(f, x, y); };
    auto g = premise_gradient(fis, x, y);
    const double h = 1e-6;
    for (std::size_t r = 0; r < fis.rules.size(); ++r) {
        for (int i = 0; i < 2; ++i) {
            FisModel cp = fis, cm = fis;
            cp.rules[r].antecedent[i].center += h;
            cm.rules[r].antecedent[i].center -= h;
            double fd = (loss(cp) - loss(cm)) / (2 * h);
            double denom = std::max(std::abs(fd), 1e-4);
            CHECK(std::abs(g.centers(static_cast<Eigen::Index>(r), i) - fd) / denom < 1e-4);

            FisModel sp = fis, sm = fis;
            sp.rules[r].antecedent[i].sigma += h;
            sm.rules[r].antecedent[i].sigma -= h;
            fd = (loss(sp) - loss(sm)) / (2 * h);
            denom = std::max(std::abs(fd), 1e-4);
            CHECK(std::abs(g.sigmas(static_cast<Eigen::Index>(r), i) - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("hybrid training fits a smooth 1-D function") {
    Eigen::MatrixXd x(60, 1);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
        double xi = -3.0 + 6.0 * i / 59.0;
        x(i, 0) = xi;
        y[i] = std::abs(xi) < 1e-12 ? 1.0 : std::sin(3.14159265358979 * xi) /
                                                (3.14159265358979 * xi);
    }
    auto res = fcm(x, 5, 2.0, 1e-6, 100, 3);
    auto fis = fis_from_fcm(res, x);
    HybridConfig cfg;
    auto rec = train_hybrid(fis, x, y);
    double range = y.maxCoeff() - y.minCoeff();
    CHECK(fis_rmse(fis, x, y) < 0.1 * range);
    CHECK(rec.train_rmse.size() <= 20);
}

TEST_CASE("zero hybrid epochs leave the model untouched") {
    Eigen::MatrixXd x(10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = i / 9.0;
        y[i] = 2 * x(i, 0);
    }
    auto res = fcm(x, 2, 2.0, 1e-6, 100, 4);
    auto fis = fis_from_fcm(res, x);
    FisModel before = fis;
    HybridConfig cfg;
    cfg.epochs = 0;
    train_hybrid(fis, x, y, Eigen::MatrixXd(), Eigen::VectorXd(), cfg);
    CHECK(fis.rules[0].consequent == before.rules[0].consequent);
    CHECK(fis.rules[0].antecedent[0].center == before.rules[0].antecedent[0].center);
}

TEST_CASE("pure backprop mode also reduces the training error") {
    Eigen::MatrixXd x(30, 1);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        x(i, 0) = i / 29.0;
        y[i] = 0.3 + 0.4 * x(i, 0);
    }
    auto res = fcm(x, 3, 2.0, 1e-6, 100, 5);
    auto fis = fis_from_fcm(res, x);
    HybridConfig cfg;
    cfg.pure_backprop = true;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    double before = fis_rmse(fis, x, y);
    train_hybrid(fis, x, y, Eigen::MatrixXd(), Eigen::VectorXd(), cfg);
    CHECK(fis_rmse(fis, x, y) < before);
}

TEST_CASE("one-vs-all ensemble separates clean blobs with every method") {
    Rng rng(11);
    const int per_class = 20, n_classes = 3;
    Eigen::MatrixXd x(per_class * n_classes, 2);
    std::vector<int> labels;
    const double cx[3] = {0.1, 0.5, 0.9};
    const double cy[3] = {0.9, 0.1, 0.9};
    for (int c = 0; c < n_classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            int row = c * per_class + i;
            x(row, 0) = cx[c] + 0.02 * rng.gaussian();
            x(row, 1) = cy[c] + 0.02 * rng.gaussian();
            labels.push_back(c);
        }
    }
    for (auto method : {RuleMethod::Grid, RuleMethod::Subtractive, RuleMethod::Fcm}) {
        EnsembleConfig cfg;
        cfg.method = method;
        cfg.fcm_clusters = 3;
        auto ens = train_ensemble(x, labels, n_classes, x, labels, cfg, 17);
        int correct = 0;
        for (int i = 0; i < x.rows(); ++i) {
            Eigen::VectorXd s = ens.score(x.row(i).transpose());
            Eigen::Index pred;
            s.maxCoeff(&pred);
            correct += (static_cast<int>(pred) == labels[static_cast<std::size_t>(i)]);
        }
        CHECK(static_cast<double>(correct) / x.rows() >= 0.99);
    }
}

TEST_CASE("single-class data always predicts that class") {
    Rng rng(12);
    Eigen::MatrixXd x(15, 2);
    std::vector<int> labels(15, 2);
    for (int i = 0; i < 15; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
    }
    EnsembleConfig cfg;
    cfg.method = RuleMethod::Subtractive;
    auto ens = train_ensemble(x, labels, 5, x, labels, cfg, 1);
    for (int i = 0; i < 15; ++i) {
        Eigen::VectorXd s = ens.score(x.row(i).transpose());
        Eigen::Index pred;
        s.maxCoeff(&pred);
        CHECK(pred == 2);
    }
}

TEST_CASE("fis json round trip") {
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    auto fis = grid_partition(lo, hi, 2);
    Rng rng(13);
    for (auto& r : fis.rules)
        for (int p = 0; p <= 2; ++p)
            r.consequent[p] = rng.uniform(-2, 2);
    auto back = fis_from_json(to_json(fis));
    REQUIRE(back.rules.size() == fis.rules.size());
    CHECK(back.dim == fis.dim);
    for (std::size_t r = 0; r < fis.rules.size(); ++r) {
        CHECK(back.rules[r].consequent == fis.rules[r].consequent);
        for (int i = 0; i < 2; ++i) {
            CHECK(back.rules[r].antecedent[i].center == fis.rules[r].antecedent[i].center);
            CHECK(back.rules[r].antecedent[i].sigma == fis.rules[r].antecedent[i].sigma);
        }
    }
}
