#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rac/net.hpp"

using rac::AdamState;
using rac::DenseNet;
using rac::OutputActivation;
using rac::Rng;
using rac::VectorXd;
using rac::MatrixXd;

TEST_SUITE("net") {

TEST_CASE("forward matches hand-computed 1-2-1 ReLU example") {
  // W1 = [2; -3], b1 = [0.5, 0.25], W2 = [1.5, -0.5], b2 = 0.1, x = 1:
  // z1 = [2.5, -2.75] -> relu [2.5, 0] -> y = 1.5*2.5 - 0.5*0 + 0.1 = 3.85
  Rng init(0);
  DenseNet net({1, 2, 1}, OutputActivation::kIdentity, init);
  VectorXd p(7);
  p << 2.0, -3.0,      // W1 (col-major, one column)
      0.5, 0.25,       // b1
      1.5, -0.5,       // W2
      0.1;             // b2
  net.set_params(p);
  VectorXd x(1);
  x << 1.0;
  CHECK(net.predict1(x)(0) == doctest::Approx(3.85).epsilon(1e-12));
}

TEST_CASE("zero-initialized parameters map any input to zero") {
  Rng init(0);
  DenseNet net({3, 4, 4, 2}, OutputActivation::kIdentity, init);
  net.set_params(VectorXd::Zero(net.param_count()));
  Rng rng(5);
  VectorXd x(3);
  for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-5.0, 5.0);
  CHECK(net.predict1(x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kaiming-uniform init: bounds sqrt(6/fan_in), zero biases") {
  Rng init(123);
  DenseNet net({20, 50, 50, 3}, OutputActivation::kIdentity, init);
  const VectorXd p = net.params();
  // layer 1: 50x20 weights then 50 biases
  const double bound1 = std::sqrt(6.0 / 20.0);
  double max_abs = 0.0;
  for (int i = 0; i < 1000; ++i) max_abs = std::max(max_abs, std::abs(p(i)));
  CHECK(max_abs <= bound1);
  CHECK(max_abs > 0.9 * bound1);  // the draw actually fills the range
  CHECK(p.segment(1000, 50).cwiseAbs().maxCoeff() == 0.0);
  // layer 2 biases
  CHECK(p.segment(1050 + 2500, 50).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward matches central finite differences on random nets") {
  Rng init(7);
  DenseNet net({3, 4, 4, 2}, OutputActivation::kIdentity, init);
  Rng data(11);
  MatrixXd x(3, 5);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = data.uniform(-1.0, 1.0);
  MatrixXd target(2, 5);
  for (int i = 0; i < target.size(); ++i)
    target.data()[i] = data.uniform(-1.0, 1.0);

  // loss = mean over batch of 0.5*|y - target|^2
  auto loss_at = [&](const VectorXd& p) {
    DenseNet n2 = net;
    n2.set_params(p);
    const MatrixXd y = n2.predict(x);
    return 0.5 * (y - target).squaredNorm() / x.cols();
  };
  const MatrixXd y = net.forward(x);
  const MatrixXd upstream = (y - target) / x.cols();
  const auto grads = net.backward(upstream);

  Rng coord(13);
  const double worst = oracles::check_gradient(loss_at, grads.params,
                                               net.params(), 100, coord);
  CHECK(worst <= 1e-3);
}

TEST_CASE("backward with tanh output head matches finite differences") {
  Rng init(19);
  DenseNet net({2, 4, 4, 2}, OutputActivation::kTanh, init);
  Rng data(23);
  MatrixXd x(2, 3);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = data.uniform(-1.0, 1.0);
  auto loss_at = [&](const VectorXd& p) {
    DenseNet n2 = net;
    n2.set_params(p);
    return n2.predict(x).sum();
  };
  net.forward(x);
  const auto grads = net.backward(MatrixXd::Ones(2, 3));
  Rng coord(29);
  CHECK(oracles::check_gradient(loss_at, grads.params, net.params(), 100,
                                coord) <= 1e-3);
}

TEST_CASE("input gradient matches finite differences") {
  Rng init(31);
  DenseNet net({4, 5, 1}, OutputActivation::kIdentity, init);
  Rng data(37);
  VectorXd x(4);
  for (int i = 0; i < 4; ++i) x(i) = data.uniform(-1.0, 1.0);
  net.forward(x);
  const auto grads = net.backward(MatrixXd::Ones(1, 1));
  const double h = 1e-5;
  for (int i = 0; i < 4; ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double fd = (net.predict1(xp)(0) - net.predict1(xm)(0)) / (2 * h);
    CHECK(oracles::relative_error(fd, grads.input(i, 0)) <= 1e-3);
  }
}

TEST_CASE("backward without forward is a usage error") {
  Rng init(0);
  DenseNet net({2, 3, 1}, OutputActivation::kIdentity, init);
  CHECK_THROWS_AS(net.backward(MatrixXd::Ones(1, 1)), std::logic_error);
}

TEST_CASE("adam single step from zero parameters") {
  // p=0, g=1, lr=1e-3 -> m_hat=1, v_hat=1, p = -lr/(1+eps)
  VectorXd p = VectorXd::Zero(1);
  AdamState s(1);
  rac::adam_step(p, VectorXd::Ones(1), s, 1e-3);
  CHECK(p(0) == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p(0) == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("adam trajectory matches an independent scalar reimplementation") {
  VectorXd p(1);
  p << 0.3;
  AdamState s(1);
  // oracle state
  double po = 0.3, m = 0.0, v = 0.0;
  Rng g(41);
  for (int t = 1; t <= 50; ++t) {
    const double grad = g.uniform(-2.0, 2.0);
    VectorXd gv(1);
    gv << grad;
    rac::adam_step(p, gv, s, 1e-2);
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    po -= 1e-2 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p(0) == doctest::Approx(po).epsilon(1e-14));
  }
}

TEST_CASE("adam with zero gradient is the identity at any step count") {
  VectorXd p(3);
  p << 1.0, -2.0, 0.5;
  const VectorXd before = p;
  AdamState s(3);
  for (int t = 0; t < 25; ++t) rac::adam_step(p, VectorXd::Zero(3), s, 0.1);
  CHECK((p - before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.t == 25);
}

TEST_CASE("adam rejects non-finite gradients with a diagnostic") {
  VectorXd p = VectorXd::Zero(2);
  AdamState s(2);
  VectorXd g(2);
  g << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rac::adam_step(p, g, s, 1e-3), std::runtime_error);
}

TEST_CASE("learning-rate warm-up endpoints and midpoint") {
  rac::WarmupSchedule w;  // 3e-5 -> 3e-4 over [5000, 10000]
  CHECK(w.at(0) == doctest::Approx(3e-5).epsilon(1e-12));
  CHECK(w.at(5000) == doctest::Approx(3e-5).epsilon(1e-12));
  CHECK(w.at(7500) == doctest::Approx(1.65e-4).epsilon(1e-12));
  CHECK(w.at(10000) == doctest::Approx(3e-4).epsilon(1e-12));
  CHECK(w.at(1000000) == doctest::Approx(3e-4).epsilon(1e-12));
}

TEST_CASE("ema update: convex combination toward the online parameters") {
  VectorXd target(2), online(2);
  target << 1.0, -1.0;
  online << 3.0, 1.0;
  rac::ema_update(target, online, 0.005);
  CHECK(target(0) == doctest::Approx(0.005 * 3.0 + 0.995 * 1.0).epsilon(1e-15));
  CHECK(target(1) == doctest::Approx(0.005 * 1.0 - 0.995).epsilon(1e-15));
  // rho=1 copies, rho=0 freezes
  VectorXd t2 = target;
  rac::ema_update(t2, online, 1.0);
  CHECK((t2 - online).cwiseAbs().maxCoeff() == 0.0);
  VectorXd t3 = target;
  rac::ema_update(t3, online, 0.0);
  CHECK((t3 - target).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("net serialization round-trips bit-identically") {
  Rng init(55);
  DenseNet net({3, 8, 8, 2}, OutputActivation::kTanh, init);
  std::stringstream ss;
  net.save(ss);
  DenseNet loaded;
  loaded.load(ss);
  CHECK(loaded.param_count() == net.param_count());
  CHECK((loaded.params() - net.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.output_activation() == net.output_activation());
}

}  // TEST_SUITE
