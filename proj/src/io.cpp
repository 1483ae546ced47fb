#include "glv/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace glv {

static_assert(std::endian::native == std::endian::little,
              "state files are little-endian; byte swapping not implemented");

namespace {

void write_array(std::ofstream& os, const Eigen::VectorXd& v) {
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

Eigen::VectorXd read_array(std::ifstream& is, int n) {
    Eigen::VectorXd v(n);
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
    if (!is) throw std::invalid_argument("state file truncated");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void StateFile::write(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "GLVORTEX-STATE v1\n";
    os << "tau " << format_double(tau.real()) << " " << format_double(tau.imag()) << "\n";
    os << "n " << n << "\n";
    os << "kappa " << format_double(kappa) << "\n";
    os << "lambda " << format_double(lambda) << "\n";
    os << "grid " << N1 << " " << N2 << "\n";
    os << "cocycle " << format_double(c1) << " " << format_double(c2) << "\n";
    os << "arrays";
    if (psi_re) os << " psi_re";
    if (psi_im) os << " psi_im";
    if (h) os << " h";
    if (A1) os << " A1";
    if (A2) os << " A2";
    os << "\n";
    for (const auto& line : provenance) os << "# " << line << "\n";
    os << "end\n";
    if (psi_re) write_array(os, *psi_re);
    if (psi_im) write_array(os, *psi_im);
    if (h) write_array(os, *h);
    if (A1) write_array(os, *A1);
    if (A2) write_array(os, *A2);
}

StateFile StateFile::read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("cannot open " + path);
    StateFile sf;
    std::string line;
    if (!std::getline(is, line) || line != "GLVORTEX-STATE v1")
        throw std::invalid_argument("bad state file header in " + path);
    std::vector<std::string> arrays;
    while (std::getline(is, line)) {
        if (line == "end") break;
        if (line.rfind("# ", 0) == 0) {
            sf.provenance.push_back(line.substr(2));
            continue;
        }
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "tau") {
            double re, im;
            ss >> re >> im;
            sf.tau = cd(re, im);
        } else if (key == "n")
            ss >> sf.n;
        else if (key == "kappa")
            ss >> sf.kappa;
        else if (key == "lambda")
            ss >> sf.lambda;
        else if (key == "grid")
            ss >> sf.N1 >> sf.N2;
        else if (key == "cocycle")
            ss >> sf.c1 >> sf.c2;
        else if (key == "arrays") {
            std::string a;
            while (ss >> a) arrays.push_back(a);
            continue;  // the array list legitimately consumes the stream
        } else
            throw std::invalid_argument("unknown state-file key: " + key);
        if (ss.fail()) throw std::invalid_argument("malformed state-file line: " + line);
    }
    if (line != "end") throw std::invalid_argument("state file missing end marker");
    if (sf.N1 < 8 || sf.N2 < 8) throw std::invalid_argument("state file grid too small");
    const int m = sf.N1 * sf.N2;
    for (const auto& a : arrays) {
        if (a == "psi_re")
            sf.psi_re = read_array(is, m);
        else if (a == "psi_im")
            sf.psi_im = read_array(is, m);
        else if (a == "h")
            sf.h = read_array(is, m);
        else if (a == "A1")
            sf.A1 = read_array(is, m);
        else if (a == "A2")
            sf.A2 = read_array(is, m);
        else
            throw std::invalid_argument("unknown array name: " + a);
    }
    return sf;
}

GridSpec StateFile::grid() const {
    return GridSpec(shape_from_tau_unchecked(tau), n, N1, N2);
}

RawLatticeState StateFile::to_raw() const {
    GridSpec g = grid();
    RawLatticeState raw{g, CField(g), VField(g), c1, c2};
    if (psi_re && psi_im) {
        for (int i = 0; i < g.size(); ++i) raw.psi.v[i] = cd((*psi_re)[i], (*psi_im)[i]);
    }
    if (A1 && A2) {
        raw.A.x = *A1;
        raw.A.y = *A2;
    } else if (h) {
        SpectralOps sp(g);
        RField hf(g, *h);
        VField a = sp.curl_star(hf);
        VField A0 = background_potential(g, n);
        raw.A.x = A0.x + a.x;
        raw.A.y = A0.y + a.y;
    } else {
        raw.A = background_potential(g, n);
    }
    return raw;
}

StateFile StateFile::from_fields(const GridSpec& g, double kappa, double lambda,
                                 const CField& psi, const RField& h) {
    StateFile sf;
    sf.tau = g.shape.tau;
    sf.n = g.n;
    sf.kappa = kappa;
    sf.lambda = lambda;
    sf.N1 = g.N1;
    sf.N2 = g.N2;
    sf.psi_re = psi.v.real();
    sf.psi_im = psi.v.imag();
    sf.h = h.v;
    return sf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << "\n";
    }
}

}  // namespace glv
