#ifndef PACING_AUCTION_HPP
#define PACING_AUCTION_HPP

#include <stdexcept>
#include <string>

namespace pacing {

/// Advertiser line item: what it is willing to pay per event and how much it may spend in total.
struct AdLine {
    std::string id;
    double max_bid = 1.0;
    double budget_total = 1.0;
};

/// One impression opportunity as seen by our line: its event probability and the
/// highest competing paced bid.
struct Opportunity {
    double p_event = 0.0;
    double competitor_bid = 0.0;
};

enum class PricingRule { FirstPrice, SecondPrice };

struct AuctionOutcome {
    bool won = false;
    double price = 0.0;
};

inline double final_bid(double max_bid, double p_event) {
    if (!(max_bid > 0.0)) {
        throw std::invalid_argument("final_bid: max_bid must be > 0");
    }
    if (!(p_event >= 0.0 && p_event <= 1.0)) {
        throw std::invalid_argument("final_bid: p_event must lie in [0, 1]");
    }
    return max_bid * p_event;
}

inline double paced_bid(double lambda, double bid) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("paced_bid: lambda must lie in (0, 1]");
    }
    return lambda * bid;
}

/// Resolves a single-slot auction against the strongest competitor. Ties lose.
inline AuctionOutcome run_auction(double own_bid, const Opportunity& opp, PricingRule rule) {
    if (!(own_bid > opp.competitor_bid)) {
        return {};
    }
    return {true, rule == PricingRule::FirstPrice ? own_bid : opp.competitor_bid};
}

inline const char* to_string(PricingRule rule) {
    return rule == PricingRule::FirstPrice ? "first_price" : "second_price";
}

}  // namespace pacing

#endif  // PACING_AUCTION_HPP
