#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "cubist/rotation.hpp"
#include "cubist/rng.hpp"

using namespace cubist;

TEST_CASE("axis-angle round trip reproduces the matrix") {
  Rng rng(21);
  for (int trial = 0; trial < 5000; ++trial) {
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-9) continue;
    axis.normalize();
    const double angle = rng.uniform(-M_PI, M_PI);
    const Eigen::Matrix3d r = rotation_from_axis_angle(angle * axis);

    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-9);

    const Eigen::Vector3d back = axis_angle_from_rotation(r);
    CHECK(back.norm() <= M_PI + 1e-12);
    const Eigen::Matrix3d r2 = rotation_from_axis_angle(back);
    CHECK((r - r2).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("tiny and straight angles") {
  CHECK((rotation_from_axis_angle(Eigen::Vector3d::Zero()) -
         Eigen::Matrix3d::Identity())
            .norm() == 0.0);

  const Eigen::Vector3d tiny(1e-13, 0, 0);
  const Eigen::Matrix3d r = rotation_from_axis_angle(tiny);
  CHECK((r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  // Exactly pi about each principal axis.
  for (int c = 0; c < 3; ++c) {
    const Eigen::Vector3d aa = M_PI * Eigen::Vector3d::Unit(c);
    const Eigen::Matrix3d rp = rotation_from_axis_angle(aa);
    const Eigen::Vector3d back = axis_angle_from_rotation(rp);
    CHECK((rotation_from_axis_angle(back) - rp).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("dual rotation matches value path") {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const TVec3<double> aa{rng.uniform(-2, 2), rng.uniform(-2, 2),
                           rng.uniform(-2, 2)};
    const auto r0 = rotation_from_axis_angle_generic(aa);

    using D = Dual<3>;
    const TVec3<D> aad{D::seeded(aa.x, 0), D::seeded(aa.y, 1),
                       D::seeded(aa.z, 2)};
    const auto rd = rotation_from_axis_angle_generic(aad);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(rd.m[i][j].v == doctest::Approx(r0.m[i][j]).epsilon(1e-14));

    // Derivative check against central differences.
    const double eps = 1e-6;
    for (int k = 0; k < 3; ++k) {
      TVec3<double> ap = aa, am = aa;
      (k == 0 ? ap.x : k == 1 ? ap.y : ap.z) += eps;
      (k == 0 ? am.x : k == 1 ? am.y : am.z) -= eps;
      const auto rp = rotation_from_axis_angle_generic(ap);
      const auto rm = rotation_from_axis_angle_generic(am);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double fd = (rp.m[i][j] - rm.m[i][j]) / (2 * eps);
          CHECK(rd.m[i][j].d[k] == doctest::Approx(fd).epsilon(1e-4));
        }
    }
  }
}
