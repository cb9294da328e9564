// narctl: decides the robust no-arbitrage condition for finite market models
// with proportional transaction costs, and constructs auditable certificates.
//
// Exit codes: 0 = pass, 2 = fail with certificate, 3 = nothing to do, 1 = error.

#include <nar/figure.hpp>
#include <nar/model_io.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace nar;

int cmd_validate(const std::string& path) {
    try {
        MarketModel m = load_model(path);
        std::cout << "valid: " << (m.kind == MarketKind::BankAccount ? "bank" : "general")
                  << " model, d=" << m.assets << ", T=" << m.tree.horizon() << ", "
                  << m.tree.size() << " nodes\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 1;
    }
}

int cmd_check(const std::string& path, const std::string& mode, const std::string& out_path,
              int jobs) {
    MarketModel m = load_model(path);
    if (mode == "bank" || mode == "both") {
        if (m.kind != MarketKind::BankAccount) {
            std::cerr << "error: --model " << mode << " requires a bank-account model\n";
            return 1;
        }
    }
    std::optional<ConeTrace> ct;
    std::optional<BankTrace> bt;
    if (mode == "cone" || mode == "both") ct = run_recursion(m, jobs);
    if (mode == "bank" || mode == "both") bt = run_recursion_bank(m, jobs);
    if (ct && bt) {
        // cross-check: the lifted box recursion must equal the cone recursion
        for (int v = 0; v < m.tree.size(); ++v) {
            bool ok = bt->V[v].is_empty() ? ct->W[v].is_empty()
                                          : equal(hormander_lift(bt->V[v]), ct->W[v]);
            if (!ok) {
                std::cerr << "error: lifted box recursion disagrees with the cone recursion at node '"
                          << m.tree.node(v).id << "'\n";
                return 1;
            }
        }
    }
    const bool holds = ct ? ct->holds : bt->holds;
    std::optional<ConsistentPriceProcess> cpp;
    if (holds) {
        cpp = find_consistent_price_process(m);
        if (!cpp) {
            std::cerr << "error: recursion passed but no strictly consistent price process found\n";
            return 1;
        }
    }
    json cert = certificate_json(m, ct ? &*ct : nullptr, bt ? &*bt : nullptr,
                                 cpp ? &*cpp : nullptr, nullptr);
    if (!out_path.empty()) save_json(cert, out_path);
    if (holds) {
        std::cout << "robust no-arbitrage holds; strictly consistent price process found\n";
        return 0;
    }
    const int t = ct ? ct->failure_time : bt->failure_time;
    std::cout << "robust no-arbitrage fails at t=" << t << " (nodes:";
    for (int v : ct ? ct->failure_nodes : bt->failure_nodes) std::cout << " " << m.tree.node(v).id;
    std::cout << ")\n";
    return 2;
}

int cmd_arbitrage(const std::string& path, const std::string& lambda_str,
                  const std::string& out_path) {
    MarketModel m = load_model(path);
    Rational lambda = parse_rational(lambda_str);
    ConeTrace ct = run_recursion(m);
    std::optional<BankTrace> bt;
    if (m.kind == MarketKind::BankAccount) bt = run_recursion_bank(m);
    if (ct.holds) {
        std::cout << "no arbitrage to construct: the robust no-arbitrage condition holds\n";
        return 3;
    }
    ArbitrageCertificate cert = build_arbitrage(m, ct, lambda);
    json doc = certificate_json(m, &ct, bt ? &*bt : nullptr, nullptr, &cert);
    if (!out_path.empty()) save_json(doc, out_path);
    std::cout << "arbitrage strategy constructed: first move at t=" << cert.failure_time
              << ", adjustment at t=" << cert.adjust_time << ", terminal payoff nonzero\n";
    return 2;
}

int cmd_verify(const std::string& cert_path, const std::string& model_path) {
    MarketModel m = load_model(model_path);
    json cert = load_json(cert_path);
    std::vector<std::string> bad = verify_certificate(cert, m);
    if (bad.empty()) {
        std::cout << "certificate verifies against the model\n";
        return 0;
    }
    for (const auto& b : bad) std::cerr << "violation: " << b << "\n";
    return 1;
}

int cmd_figure(const std::string& path, const std::string& t_range, const std::string& out_path) {
    MarketModel m = load_model(path);
    if (m.kind != MarketKind::BankAccount || m.assets != 3) {
        std::cerr << "error: figure requires a bank-account model with d = 3\n";
        return 1;
    }
    int lo = 0, hi = m.tree.horizon();
    if (!t_range.empty()) {
        auto colon = t_range.find(':');
        if (colon == std::string::npos) {
            std::cerr << "error: --t-range expects the form a:b\n";
            return 1;
        }
        lo = std::stoi(t_range.substr(0, colon));
        hi = std::stoi(t_range.substr(colon + 1));
        if (lo < 0 || hi > m.tree.horizon() || lo > hi) {
            std::cerr << "error: --t-range outside 0:" << m.tree.horizon() << "\n";
            return 1;
        }
    }
    BankTrace bt = run_recursion_bank(m);
    std::string svg = render_figure(m, bt, lo, hi);
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 1;
    }
    out << svg;
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust no-arbitrage checker for markets with transaction costs"};
    app.require_subcommand(1);

    std::string path, out_path, mode = "cone", lambda = "1/2", t_range, cert_path;
    int jobs = 1;

    auto* validate = app.add_subcommand("validate", "validate a model file");
    validate->add_option("file", path, "model JSON file")->required();

    auto* check = app.add_subcommand("check", "decide the robust no-arbitrage condition");
    check->add_option("file", path, "model JSON file")->required();
    check->add_option("--model", mode, "recursion to run: cone, bank, or both")
        ->check(CLI::IsMember({"cone", "bank", "both"}));
    check->add_option("--out", out_path, "write the certificate JSON here");
    check->add_option("--jobs", jobs, "parallel node evaluation within a level")
        ->check(CLI::PositiveNumber);

    auto* arb = app.add_subcommand("arbitrage", "construct an explicit arbitrage strategy");
    arb->add_option("file", path, "model JSON file")->required();
    arb->add_option("--lambda", lambda, "spread contraction factor in (0,1), e.g. 1/2");
    arb->add_option("--out", out_path, "write the certificate JSON here");

    auto* verify = app.add_subcommand("verify", "re-check a certificate against a model");
    verify->add_option("certificate", cert_path, "certificate JSON file")->required();
    verify->add_option("file", path, "model JSON file")->required();

    auto* figure = app.add_subcommand("figure", "render the boxes and recursion values as SVG");
    figure->add_option("file", path, "model JSON file")->required();
    figure->add_option("--t-range", t_range, "times to draw, as a:b");
    figure->add_option("--out", out_path, "output SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(path);
        if (check->parsed()) return cmd_check(path, mode, out_path, jobs);
        if (arb->parsed()) return cmd_arbitrage(path, lambda, out_path);
        if (verify->parsed()) return cmd_verify(cert_path, path);
        if (figure->parsed()) return cmd_figure(path, t_range, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
