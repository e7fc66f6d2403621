#include <algorithm>
#include <cmath>
#include <vector>

#include "embed_internal.hpp"
#include "ule/error.hpp"
#include "ule/rng.hpp"

namespace ule::detail {

namespace {

// Column-major block of k columns.
struct Block {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // column-major: data[c*rows + r]
    Block(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double* col(std::size_t c) { return data.data() + c * rows; }
    const double* col(std::size_t c) const { return data.data() + c * rows; }
};

// Y = A * X with A the binary CSR incidence (m x n), X n x k.
Block csr_multiply(const LikeCorpus& a, const Block& x) {
    Block y(a.num_users(), x.cols);
    for (std::size_t u = 0; u < a.num_users(); ++u) {
        auto likes = a.likes_of(static_cast<std::uint32_t>(u));
        for (std::size_t c = 0; c < x.cols; ++c) {
            const double* xc = x.col(c);
            double acc = 0.0;
            for (std::uint32_t e : likes) acc += xc[e];
            y.col(c)[u] = acc;
        }
    }
    return y;
}

// Z = A^T * Y, Y m x k -> Z n x k.
Block csr_transpose_multiply(const LikeCorpus& a, const Block& y) {
    Block z(a.num_entities(), y.cols);
    for (std::size_t u = 0; u < a.num_users(); ++u) {
        auto likes = a.likes_of(static_cast<std::uint32_t>(u));
        for (std::size_t c = 0; c < y.cols; ++c) {
            const double yc = y.col(c)[u];
            double* zc = z.col(c);
            for (std::uint32_t e : likes) zc[e] += yc;
        }
    }
    return z;
}

// In-place modified Gram-Schmidt, two passes for numerical robustness.
// Columns that vanish are replaced by zeros.
void orthonormalize(Block& q) {
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < q.cols; ++c) {
            double* qc = q.col(c);
            for (std::size_t p = 0; p < c; ++p) {
                const double* qp = q.col(p);
                double dot = 0.0;
                for (std::size_t r = 0; r < q.rows; ++r) dot += qc[r] * qp[r];
                for (std::size_t r = 0; r < q.rows; ++r) qc[r] -= dot * qp[r];
            }
            double norm = 0.0;
            for (std::size_t r = 0; r < q.rows; ++r) norm += qc[r] * qc[r];
            norm = std::sqrt(norm);
            if (norm > 1e-12) {
                const double inv = 1.0 / norm;
                for (std::size_t r = 0; r < q.rows; ++r) qc[r] *= inv;
            } else {
                std::fill(qc, qc + q.rows, 0.0);
            }
        }
    }
}

// Cyclic Jacobi eigendecomposition of a symmetric l x l matrix. Returns
// eigenvalues descending with matching eigenvector columns.
void jacobi_eigen(std::vector<double>& a, std::size_t l, std::vector<double>& eigenvalues,
                  Block& eigenvectors) {
    eigenvectors = Block(l, l);
    for (std::size_t i = 0; i < l; ++i) eigenvectors.col(i)[i] = 1.0;
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * l + c]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t r = 0; r < l; ++r)
            for (std::size_t c = r + 1; c < l; ++c) off += at(r, c) * at(r, c);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < l; ++p) {
            for (std::size_t q = p + 1; q < l; ++q) {
                const double apq = at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < l; ++r) {
                    const double arp = at(r, p), arq = at(r, q);
                    at(r, p) = c * arp - s * arq;
                    at(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < l; ++r) {
                    const double apr = at(p, r), aqr = at(q, r);
                    at(p, r) = c * apr - s * aqr;
                    at(q, r) = s * apr + c * aqr;
                }
                for (std::size_t r = 0; r < l; ++r) {
                    const double vp = eigenvectors.col(p)[r], vq = eigenvectors.col(q)[r];
                    eigenvectors.col(p)[r] = c * vp - s * vq;
                    eigenvectors.col(q)[r] = s * vp + c * vq;
                }
            }
        }
    }
    eigenvalues.resize(l);
    for (std::size_t i = 0; i < l; ++i) eigenvalues[i] = at(i, i);
    // Sort descending, permuting eigenvector columns along.
    std::vector<std::size_t> order(l);
    for (std::size_t i = 0; i < l; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return eigenvalues[x] > eigenvalues[y]; });
    std::vector<double> ev(l);
    Block vec(l, l);
    for (std::size_t i = 0; i < l; ++i) {
        ev[i] = eigenvalues[order[i]];
        std::copy(eigenvectors.col(order[i]), eigenvectors.col(order[i]) + l, vec.col(i));
    }
    eigenvalues = std::move(ev);
    eigenvectors = std::move(vec);
}

}  // namespace

// Randomized range finder with power iterations, then an exact factorization
// of the projected matrix via the Gram eigendecomposition. The sketch width
// dim + oversample captures an exact-rank subspace exactly, so low-rank
// corpora reconstruct to roundoff.
TrainedEmbedding train_svd(const LikeCorpus& corpus, const EmbeddingConfig& config) {
    const std::size_t m = corpus.num_users();
    const std::size_t n = corpus.num_entities();
    const std::size_t r = static_cast<std::size_t>(config.dim);
    const std::size_t l = std::min(n, r + static_cast<std::size_t>(std::max(0, config.svd_oversample)));

    Rng rng(config.rng_seed);
    Block omega(n, l);
    for (double& v : omega.data) v = rng.next_normal();

    Block q = csr_multiply(corpus, omega);  // m x l
    orthonormalize(q);
    for (int it = 0; it < config.svd_power_iterations; ++it) {
        Block z = csr_transpose_multiply(corpus, q);  // n x l
        orthonormalize(z);
        q = csr_multiply(corpus, z);
        orthonormalize(q);
    }

    // B = Q^T A  (l x n), stored as its transpose n x l for column access.
    Block bt = csr_transpose_multiply(corpus, q);

    // Gram matrix G = B B^T (l x l).
    std::vector<double> gram(l * l, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i; j < l; ++j) {
            const double* bi = bt.col(i);
            const double* bj = bt.col(j);
            double dot = 0.0;
            for (std::size_t e = 0; e < n; ++e) dot += bi[e] * bj[e];
            gram[i * l + j] = dot;
            gram[j * l + i] = dot;
        }
    }
    std::vector<double> eigenvalues;
    Block s(1, 1);
    jacobi_eigen(gram, l, eigenvalues, s);

    std::vector<double> sigma(r, 0.0);
    for (std::size_t i = 0; i < r && i < l; ++i)
        sigma[i] = eigenvalues[i] > 0.0 ? std::sqrt(eigenvalues[i]) : 0.0;
    const double sigma_max = sigma.empty() ? 0.0 : sigma[0];

    // V = B^T S / sigma (n x r); columns with vanishing sigma are zeroed.
    EmbeddingMatrix basis;
    basis.rows = n;
    basis.dim = r;
    basis.ids = corpus.entity_ids;
    basis.values.assign(n * r, 0.0);
    for (std::size_t c = 0; c < r && c < l; ++c) {
        if (sigma[c] <= 1e-12 * std::max(1.0, sigma_max)) continue;
        const double inv = 1.0 / sigma[c];
        for (std::size_t e = 0; e < n; ++e) {
            double acc = 0.0;
            for (std::size_t i = 0; i < l; ++i) acc += bt.col(i)[e] * s.col(c)[i];
            basis.values[e * r + c] = acc * inv;
        }
    }

    // User rows R = A V = U * W_r.
    EmbeddingMatrix users;
    users.rows = m;
    users.dim = r;
    users.ids = corpus.user_ids;
    users.values.assign(m * r, 0.0);
    for (std::size_t u = 0; u < m; ++u) {
        auto likes = corpus.likes_of(static_cast<std::uint32_t>(u));
        double* dst = users.values.data() + u * r;
        for (std::uint32_t e : likes) {
            const double* ve = basis.values.data() + static_cast<std::size_t>(e) * r;
            for (std::size_t c = 0; c < r; ++c) dst[c] += ve[c];
        }
    }

    // Objective: RMS reconstruction error over a fixed entry sample, against
    // the rank-0 model as the starting point.
    TrainStats stats;
    stats.objective_name = "sampled reconstruction rmse";
    stats.epochs_run = config.svd_power_iterations;
    {
        Rng sample_rng(config.rng_seed ^ 0x5eedULL);
        const std::size_t samples = 4096;
        double sq_zero = 0.0, sq_model = 0.0;
        for (std::size_t s_i = 0; s_i < samples; ++s_i) {
            std::size_t u, e;
            double a_ue;
            if (s_i % 2 == 0 && corpus.num_pairs() > 0) {
                const std::uint64_t pick = sample_rng.next_below(corpus.num_pairs());
                const auto it = std::upper_bound(corpus.row_ptr.begin(), corpus.row_ptr.end(), pick);
                u = static_cast<std::size_t>(it - corpus.row_ptr.begin()) - 1;
                e = corpus.col_idx[pick];
                a_ue = 1.0;
            } else {
                u = static_cast<std::size_t>(sample_rng.next_below(m));
                e = static_cast<std::size_t>(sample_rng.next_below(n));
                auto likes = corpus.likes_of(static_cast<std::uint32_t>(u));
                a_ue = std::binary_search(likes.begin(), likes.end(), static_cast<std::uint32_t>(e))
                           ? 1.0
                           : 0.0;
            }
            double approx = 0.0;
            for (std::size_t c = 0; c < r; ++c)
                approx += users.values[u * r + c] * basis.values[e * r + c];
            sq_zero += a_ue * a_ue;
            sq_model += (a_ue - approx) * (a_ue - approx);
        }
        stats.initial_objective = std::sqrt(sq_zero / static_cast<double>(samples));
        stats.final_objective = std::sqrt(sq_model / static_cast<double>(samples));
    }

    TrainedEmbedding out;
    out.users = std::move(users);
    out.entities = std::move(basis);
    out.stats = std::move(stats);
    return out;
}

}  // namespace ule::detail
