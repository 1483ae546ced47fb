#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glv/gauge.hpp"
#include "glv/grid.hpp"

namespace glv {

// Cell-state container mirrored by the on-disk format: a UTF-8 text header
// followed by flat little-endian 8-byte-float arrays, row-major with the t1
// index fastest.
//
//   GLVORTEX-STATE v1
//   tau <re> <im>
//   n <int>
//   kappa <val>
//   lambda <val>
//   grid <N1> <N2>
//   cocycle <c1> <c2>
//   arrays <name> <name> ...        (psi_re, psi_im, h, A1, A2)
//   # <optional provenance lines>
//   end
//   <binary data>
struct StateFile {
    cd tau;
    int n = 1;
    double kappa = 1.0;
    double lambda = 1.0;
    int N1 = 0, N2 = 0;
    double c1 = 0.0, c2 = 0.0;
    std::optional<Eigen::VectorXd> psi_re, psi_im, h, A1, A2;
    std::vector<std::string> provenance;

    static StateFile read(const std::string& path);
    void write(const std::string& path) const;

    GridSpec grid() const;
    // assemble the pre-gauge state; A falls back to A0 + curl* h when A1/A2
    // are absent
    RawLatticeState to_raw() const;

    static StateFile from_fields(const GridSpec& g, double kappa, double lambda,
                                 const CField& psi, const RField& h);
};

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double v);  // shortest round-trip-exact decimal

}  // namespace glv
