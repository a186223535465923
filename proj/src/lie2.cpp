#include "gerbecal/lie2.hpp"

#include <Eigen/SVD>

namespace gerbecal::lie2 {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd FinDimLie2::bracket00(const VectorXd& x, const VectorXd& y) const {
    VectorXd out = VectorXd::Zero(n0);
    for (int i = 0; i < n0; ++i) out[i] = x.dot(b00[static_cast<std::size_t>(i)] * y);
    return out;
}

VectorXd FinDimLie2::bracket01(const VectorXd& x, const VectorXd& a) const {
    VectorXd out = VectorXd::Zero(n1);
    for (int i = 0; i < n1; ++i) out[i] = x.dot(b01[static_cast<std::size_t>(i)] * a);
    return out;
}

double& FinDimLie2::jref(int i, int j, int k, int l) {
    return jtensor[static_cast<std::size_t>(((i * n0 + j) * n0 + k) * n0 + l)];
}

double FinDimLie2::jval(int i, int j, int k, int l) const {
    if (jtensor.empty()) return 0.0;
    return jtensor[static_cast<std::size_t>(((i * n0 + j) * n0 + k) * n0 + l)];
}

VectorXd FinDimLie2::jac(const VectorXd& x, const VectorXd& y, const VectorXd& z) const {
    VectorXd out = VectorXd::Zero(n1);
    if (jtensor.empty()) return out;
    for (int i = 0; i < n1; ++i) {
        double v = 0;
        for (int j = 0; j < n0; ++j)
            for (int k = 0; k < n0; ++k)
                for (int l = 0; l < n0; ++l) v += jval(i, j, k, l) * x[j] * y[k] * z[l];
        out[i] = v;
    }
    return out;
}

FinDimLie2 FinDimLie2::from_lie_algebra(const std::vector<MatrixXd>& c) {
    FinDimLie2 L;
    L.n0 = static_cast<int>(c.size());
    L.n1 = 0;
    L.d = MatrixXd::Zero(L.n0, 0);
    L.b00 = c;
    return L;
}

FinDimLie2 FinDimLie2::so3() {
    std::vector<MatrixXd> c(3, MatrixXd::Zero(3, 3));
    // [e_j, e_k] = eps_{jkl} e_l
    auto eps = [](int i, int j, int k) -> double {
        if (i == j || j == k || i == k) return 0;
        return ((j - i + 3) % 3 == 1 && (k - j + 3) % 3 == 1) ? 1.0 : -1.0;
    };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(i)](j, k) = eps(j, k, i);
    return from_lie_algebra(c);
}

FinDimLie2 FinDimLie2::conjugated(const FinDimLie2& g, const MatrixXd& P) {
    // bracket'(x,y) = P^{-1} [P x, P y]
    MatrixXd Pi = P.inverse();
    std::vector<MatrixXd> c(static_cast<std::size_t>(g.n0), MatrixXd::Zero(g.n0, g.n0));
    for (int i = 0; i < g.n0; ++i) {
        MatrixXd acc = MatrixXd::Zero(g.n0, g.n0);
        for (int a = 0; a < g.n0; ++a)
            acc += Pi(i, a) * (P.transpose() * g.b00[static_cast<std::size_t>(a)] * P);
        c[static_cast<std::size_t>(i)] = acc;
    }
    return from_lie_algebra(c);
}

FinDimLie2 FinDimLie2::adjoint_crossed_module(const FinDimLie2& g) {
    FinDimLie2 L;
    L.n0 = g.n0;
    L.n1 = g.n0;
    L.d = MatrixXd::Identity(g.n0, g.n0);
    L.b00 = g.b00;
    L.b01 = g.b00; // adjoint action
    return L;
}

FinDimLie2 FinDimLie2::string_type() {
    FinDimLie2 L = so3();
    L.n1 = 1;
    L.d = MatrixXd::Zero(3, 1);
    L.b01.assign(1, MatrixXd::Zero(3, 1));
    L.jtensor.assign(27, 0.0);
    auto eps = [](int i, int j, int k) -> double {
        if (i == j || j == k || i == k) return 0;
        return ((j - i + 3) % 3 == 1 && (k - j + 3) % 3 == 1) ? 1.0 : -1.0;
    };
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) L.jref(0, j, k, l) = eps(j, k, l);
    return L;
}

std::vector<VectorXd> random_vectors(int dim, int count, rng::Stream& st) {
    std::vector<VectorXd> out;
    for (int k = 0; k < count; ++k) {
        VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = st.uniform(-2, 2);
        out.push_back(std::move(v));
    }
    return out;
}

VectorXd FinDimButterfly::br(const VectorXd& a, const VectorXd& b) const {
    VectorXd out = VectorXd::Zero(dimE);
    for (int i = 0; i < dimE; ++i) out[i] = a.dot(bracket[static_cast<std::size_t>(i)] * b);
    return out;
}

namespace {

int mat_rank(const MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(m);
    qr.setThreshold(1e-9);
    return static_cast<int>(qr.rank());
}

double mat_norm(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

Report check_butterfly(const FinDimButterfly& b, const VerifyCtx& ctx, const std::string& prefix,
                       bool expect_invertible) {
    Report rep;
    rep.suite = prefix;
    const FinDimLie2& V = *b.src;
    const FinDimLie2& W = *b.tgt;

    // diagram commutation
    rep.add(CheckResult::from_residual(prefix + ".sigma_kappa_is_d", mat_norm(b.sigma * b.kappa - V.d),
                                       ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_lambda_is_d", mat_norm(b.rho * b.lambda - W.d),
                                       ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_kappa_zero", mat_norm(b.rho * b.kappa), ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".sigma_lambda_zero", mat_norm(b.sigma * b.lambda),
                                       ctx.tol));

    // NE-SW short exactness by ranks
    bool exact = mat_rank(b.lambda) == W.n1 && mat_rank(b.sigma) == V.n0 &&
                 b.dimE == W.n1 + V.n0;
    rep.add(exact ? CheckResult::pass(prefix + ".ne_sw_exact", 0.0)
                  : CheckResult::fail(prefix + ".ne_sw_exact", 1.0, "",
                                      "rank conditions for 0 -> W1 -> E -> V0 -> 0"));
    if (expect_invertible) {
        bool inv = mat_rank(b.kappa) == V.n1 && mat_rank(b.rho) == W.n0 &&
                   b.dimE == V.n1 + W.n0;
        rep.add(inv ? CheckResult::pass(prefix + ".nw_se_exact", 0.0)
                    : CheckResult::fail(prefix + ".nw_se_exact", 1.0, "",
                                        "rank conditions for 0 -> V1 -> E -> W0 -> 0"));
    }

    // sampled bracket conditions
    auto st = rng::derive(ctx.seed, prefix + ".elements");
    auto es = random_vectors(b.dimE, 6, st);
    auto v1s = random_vectors(V.n1, 3, st);
    auto w1s = random_vectors(W.n1, 3, st);

    double sigma_br = 0, rho_br = 0, wing_w = 0, wing_v = 0, jacw = 0;
    for (const auto& x : es)
        for (const auto& y : es) {
            sigma_br = std::max(sigma_br,
                                mat_norm(b.sigma * b.br(x, y) -
                                         V.bracket00(b.sigma * x, b.sigma * y)));
            rho_br = std::max(rho_br,
                              mat_norm(b.rho * b.br(x, y) - W.bracket00(b.rho * x, b.rho * y)));
        }
    rep.add(CheckResult::from_residual(prefix + ".sigma_preserves_bracket", sigma_br, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_preserves_bracket", rho_br, ctx.tol));

    for (const auto& x : es) {
        for (const auto& u : w1s) {
            if (W.n1 == 0) break;
            wing_w = std::max(wing_w, mat_norm(b.br(x, b.lambda * u) -
                                               b.lambda * W.bracket01(b.rho * x, u)));
        }
        for (const auto& u : v1s) {
            if (V.n1 == 0) break;
            wing_v = std::max(wing_v, mat_norm(b.br(x, b.kappa * u) -
                                               b.kappa * V.bracket01(b.sigma * x, u)));
        }
    }
    rep.add(CheckResult::from_residual(prefix + ".lambda_equivariance", wing_w, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".kappa_equivariance", wing_v, ctx.tol));

    for (const auto& x : es)
        for (const auto& y : es)
            for (const auto& z : es) {
                VectorXd cyc = b.br(x, b.br(y, z)) + b.br(y, b.br(z, x)) + b.br(z, b.br(x, y));
                VectorXd lhs = VectorXd::Zero(b.dimE);
                if (W.n1) lhs += b.lambda * W.jac(b.rho * x, b.rho * y, b.rho * z);
                if (V.n1) lhs += b.kappa * V.jac(b.sigma * x, b.sigma * y, b.sigma * z);
                jacw = std::max(jacw, mat_norm(lhs - cyc));
            }
    rep.add(CheckResult::from_residual(prefix + ".jacobiator_transport", jacw, ctx.tol));
    rep.sort_by_id();
    return rep;
}

FinDimButterfly butterfly_of_morphism(const FinDimMorphism& f) {
    const FinDimLie2& U = *f.src;
    const FinDimLie2& V = *f.tgt;
    FinDimButterfly b;
    b.src = f.src;
    b.tgt = f.tgt;
    b.dimE = U.n0 + V.n1;

    // carrier coordinates: (u, w) with u in U0, w in V1
    b.kappa = MatrixXd::Zero(b.dimE, U.n1);
    b.kappa.topRows(U.n0) = U.d;
    if (V.n1 && U.n1) b.kappa.bottomRows(V.n1) = -f.F1;
    b.lambda = MatrixXd::Zero(b.dimE, V.n1);
    if (V.n1) b.lambda.bottomRows(V.n1) = MatrixXd::Identity(V.n1, V.n1);
    b.sigma = MatrixXd::Zero(U.n0, b.dimE);
    b.sigma.leftCols(U.n0) = MatrixXd::Identity(U.n0, U.n0);
    b.rho = MatrixXd::Zero(V.n0, b.dimE);
    b.rho.leftCols(U.n0) = f.F0;
    if (V.n1) b.rho.rightCols(V.n1) = V.d;

    // [(u,w),(u',w')] = ([u,u'], [F0 u, w'] - [F0 u', w] + [dw, w'] + F2(u,u'))
    b.bracket.assign(static_cast<std::size_t>(b.dimE), MatrixXd::Zero(b.dimE, b.dimE));
    for (int i = 0; i < U.n0; ++i)
        b.bracket[static_cast<std::size_t>(i)].topLeftCorner(U.n0, U.n0) =
            U.b00[static_cast<std::size_t>(i)];
    for (int i = 0; i < V.n1; ++i) {
        MatrixXd& Bi = b.bracket[static_cast<std::size_t>(U.n0 + i)];
        const MatrixXd& act = V.b01[static_cast<std::size_t>(i)]; // (V0 x V1)
        // [F0 u, w'] term: row-index in U0 block, col-index in V1 block
        Bi.topRightCorner(U.n0, V.n1) += f.F0.transpose() * act;
        // -[F0 u', w]: transpose with sign
        Bi.bottomLeftCorner(V.n1, U.n0) += -(f.F0.transpose() * act).transpose();
        // [dw, w']
        Bi.bottomRightCorner(V.n1, V.n1) += V.d.transpose() * act;
        if (!f.F2.empty()) Bi.topLeftCorner(U.n0, U.n0) += f.F2[static_cast<std::size_t>(i)];
    }
    return b;
}

FinDimButterfly identity_butterfly(const FinDimLie2& V) {
    FinDimMorphism id;
    id.src = &V;
    id.tgt = &V;
    id.F0 = MatrixXd::Identity(V.n0, V.n0);
    id.F1 = MatrixXd::Identity(V.n1, V.n1);
    return butterfly_of_morphism(id);
}

FinDimButterfly flip(const FinDimButterfly& b) {
    FinDimButterfly f = b;
    std::swap(f.src, f.tgt);
    std::swap(f.kappa, f.lambda);
    std::swap(f.sigma, f.rho);
    return f;
}

FinDimButterfly compose_butterflies(const FinDimButterfly& b1, const FinDimButterfly& b2) {
    if (b1.tgt != b2.src) throw DimensionMismatch("compose_butterflies: middle instances differ");
    const FinDimLie2& V = *b1.tgt;
    const int dE = b1.dimE, dF = b2.dimE;

    // fibred sum: pairs (e, e') with rho1(e) = sigma2(e')
    MatrixXd C(V.n0, dE + dF);
    C.leftCols(dE) = b1.rho;
    C.rightCols(dF) = -b2.sigma;
    Eigen::FullPivLU<MatrixXd> lu(C);
    lu.setThreshold(1e-10);
    MatrixXd S = lu.kernel(); // (dE+dF) x s

    // relation: image of V1 under (lambda1, kappa2)
    MatrixXd R(dE + dF, V.n1);
    R.topRows(dE) = b1.lambda;
    R.bottomRows(dF) = b2.kappa;

    // coordinates of R inside S, then an orthonormal complement
    MatrixXd Qc;
    int q = static_cast<int>(S.cols());
    if (R.cols() == 0) {
        Qc = MatrixXd::Identity(q, q);
    } else {
        MatrixXd Rs = S.colPivHouseholderQr().solve(R);
        Eigen::JacobiSVD<MatrixXd> svd(Rs, Eigen::ComputeFullU);
        int rk = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()[i] > 1e-10) ++rk;
        q -= rk;
        Qc = svd.matrixU().rightCols(q); // complement basis in S coordinates
    }

    // quotient coordinates: representative map S*Qc, projection P
    MatrixXd rep = S * Qc;                  // (dE+dF) x q
    // projector onto quotient coordinates: least squares against [rep | R]
    MatrixXd basis(dE + dF, q + static_cast<int>(R.cols()));
    basis.leftCols(q) = rep;
    basis.rightCols(R.cols()) = R;
    auto project = [basis, q](const VectorXd& v) -> VectorXd {
        VectorXd c = basis.colPivHouseholderQr().solve(v);
        return c.head(q);
    };
    auto project_mat = [&](const MatrixXd& M) -> MatrixXd {
        MatrixXd out(q, M.cols());
        for (int j = 0; j < M.cols(); ++j) out.col(j) = project(M.col(j));
        return out;
    };

    FinDimButterfly c;
    c.src = b1.src;
    c.tgt = b2.tgt;
    c.dimE = q;

    const FinDimLie2& U = *b1.src;
    const FinDimLie2& W = *b2.tgt;
    MatrixXd kap(dE + dF, U.n1);
    kap.topRows(dE) = b1.kappa;
    kap.bottomRows(dF).setZero();
    c.kappa = project_mat(kap);
    MatrixXd lam(dE + dF, W.n1);
    lam.topRows(dE).setZero();
    lam.bottomRows(dF) = b2.lambda;
    c.lambda = project_mat(lam);
    c.sigma = b1.sigma * rep.topRows(dE);
    c.rho = b2.rho * rep.bottomRows(dF);

    c.bracket.assign(static_cast<std::size_t>(q), MatrixXd::Zero(q, q));
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            VectorXd x = rep.col(i), y = rep.col(j);
            VectorXd bz(dE + dF);
            bz.head(dE) = b1.br(x.head(dE), y.head(dE));
            bz.tail(dF) = b2.br(x.tail(dF), y.tail(dF));
            VectorXd pz = project(bz);
            for (int k = 0; k < q; ++k) c.bracket[static_cast<std::size_t>(k)](i, j) = pz[k];
        }
    return c;
}

std::optional<MatrixXd> find_2iso(const FinDimButterfly& b1, const FinDimButterfly& b2,
                                  const VerifyCtx& ctx) {
    if (b1.src != b2.src || b1.tgt != b2.tgt) return std::nullopt;
    const int dE = b1.dimE, dF = b2.dimE;
    const FinDimLie2& V = *b1.src;
    const FinDimLie2& W = *b1.tgt;

    // unknown phi: dF x dE, dense system A * vec(phi) = r (column major)
    const int nv = dE * dF;
    // phi * kappa1 = kappa2  -> (kappa1^T (x) I_dF) vec(phi) = vec(kappa2)
    // phi * lambda1 = lambda2
    // sigma2 * phi = sigma1  -> (I_dE (x) sigma2) vec(phi) = vec(sigma1)
    // rho2 * phi = rho1
    auto kron_right = [&](const MatrixXd& K) { // phi * K : (K^T (x) I_dF)
        MatrixXd A = MatrixXd::Zero(dF * K.cols(), nv);
        for (int c = 0; c < K.cols(); ++c)
            for (int r = 0; r < K.rows(); ++r)
                for (int i = 0; i < dF; ++i) A(c * dF + i, r * dF + i) = K(r, c);
        return A;
    };
    auto kron_left = [&](const MatrixXd& L) { // L * phi : (I_dE (x) L)
        MatrixXd A = MatrixXd::Zero(L.rows() * dE, nv);
        for (int c = 0; c < dE; ++c)
            for (int r = 0; r < L.rows(); ++r)
                for (int k = 0; k < dF; ++k) A(c * L.rows() + r, c * dF + k) = L(r, k);
        return A;
    };
    auto vec = [](const MatrixXd& M) {
        VectorXd v(M.size());
        int t = 0;
        for (int c = 0; c < M.cols(); ++c)
            for (int r = 0; r < M.rows(); ++r) v[t++] = M(r, c);
        return v;
    };

    std::vector<MatrixXd> As;
    std::vector<VectorXd> rs;
    if (V.n1) {
        As.push_back(kron_right(b1.kappa));
        rs.push_back(vec(b2.kappa));
    }
    if (W.n1) {
        As.push_back(kron_right(b1.lambda));
        rs.push_back(vec(b2.lambda));
    }
    As.push_back(kron_left(b2.sigma));
    rs.push_back(vec(b1.sigma));
    As.push_back(kron_left(b2.rho));
    rs.push_back(vec(b1.rho));

    int rows = 0;
    for (const auto& A : As) rows += static_cast<int>(A.rows());
    MatrixXd A(rows, nv);
    VectorXd r(rows);
    int at = 0;
    for (std::size_t i = 0; i < As.size(); ++i) {
        A.middleRows(at, As[i].rows()) = As[i];
        r.segment(at, rs[i].size()) = rs[i];
        at += static_cast<int>(As[i].rows());
    }

    VectorXd sol = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(r);
    double lsq_resid = (A * sol - r).cwiseAbs().maxCoeff();
    if (lsq_resid > 1e-8) return std::nullopt;

    MatrixXd phi(dF, dE);
    for (int c = 0; c < dE; ++c) phi.col(c) = sol.segment(c * dF, dF);

    // bracket preservation on samples
    auto st = rng::derive(ctx.seed, "find_2iso");
    auto xs = random_vectors(dE, 6, st);
    for (const auto& x : xs)
        for (const auto& y : xs) {
            VectorXd lhs = phi * b1.br(x, y);
            VectorXd rhs = b2.br(phi * x, phi * y);
            if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-8) return std::nullopt;
        }
    return phi;
}

} // namespace gerbecal::lie2
