//------------------------------------------------------------------------------
//
//   Copyright 2026 The temarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "temarket/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

namespace temarket::market {

std::string format_number(double value)
{
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double AuctionRecord::unserved_kw() const
{
  if (!curve)
  {
    return 0.0;
  }
  return std::max(0.0, curve->max_quantity() - result.equilibrium_quantity_kw);
}

void MarketReport::write_csv(std::ostream &out) const
{
  out << "round,asker,kind,bidder,quantity_kw,price_cents\n";
  for (auto const &r : rounds)
  {
    for (auto const &a : r.auctions)
    {
      auto offers = a.offers;
      std::sort(offers.begin(), offers.end(), [](BidOffer const &x, BidOffer const &y) {
        return std::tie(x.bidder_id, x.price_cents, x.quantity_kw) <
               std::tie(y.bidder_id, y.price_cents, y.quantity_kw);
      });
      for (auto const &o : offers)
      {
        out << r.round << ',' << a.asker_id << ",offer," << o.bidder_id << ','
            << format_number(o.quantity_kw) << ',' << format_number(o.price_cents) << '\n';
      }
      for (auto const &t : a.result.transactions)
      {
        out << r.round << ',' << a.asker_id << ",transaction," << t.bidder_id << ','
            << format_number(t.cleared_quantity_kw) << ','
            << format_number(t.clearing_price_cents) << '\n';
      }
      out << r.round << ',' << a.asker_id << ",equilibrium,,"
          << format_number(a.result.equilibrium_quantity_kw) << ','
          << (a.result.equilibrium_price_cents ? format_number(*a.result.equilibrium_price_cents)
                                               : "")
          << '\n';
      out << r.round << ',' << a.asker_id << ",unserved,," << format_number(a.unserved_kw())
          << ",\n";
    }
  }
}

void MarketReport::write(std::string const &dir, bool svg) const
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
  {
    throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  }
  auto open = [&](std::string const &name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out)
    {
      throw IoError("cannot write '" + (fs::path(dir) / name).string() + "'");
    }
    return out;
  };
  {
    auto out = open("report.csv");
    write_csv(out);
  }
  {
    auto out = open("messages.ndjson");
    bus::write_ndjson(out, messages);
  }
  {
    auto out = open("audit.ndjson");
    bus::write_ndjson(out, audit);
  }
  if (svg && !rounds.empty())
  {
    for (auto const &a : rounds.back().auctions)
    {
      auto out = open("auction_" + a.asker_id + ".svg");
      out << auction_svg(a);
    }
  }
}

bus::Json MarketReport::summary_json() const
{
  bus::Json j;
  j["scenario"] = scenario;
  j["mode"]     = mode;
  j["seed"]     = seed;
  j["clearing"] = auction::to_string(clearing);
  j["complete"] = complete;
  if (!error.empty())
  {
    j["error"] = error;
  }
  auto rounds_json = bus::Json::array();
  for (auto const &r : rounds)
  {
    bus::Json rj;
    rj["round"]   = r.round;
    auto auctions = bus::Json::array();
    for (auto const &a : r.auctions)
    {
      bus::Json aj;
      aj["asker"]                   = a.asker_id;
      aj["equilibrium_quantity_kw"] = a.result.equilibrium_quantity_kw;
      aj["intersection_quantity_kw"] = a.result.intersection_quantity_kw;
      aj["equilibrium_price_cents"] =
          a.result.equilibrium_price_cents ? bus::Json(*a.result.equilibrium_price_cents)
                                           : bus::Json();
      aj["unserved_kw"] = a.unserved_kw();
      auto txs          = bus::Json::array();
      for (auto const &t : a.result.transactions)
      {
        bus::Json tj;
        tj["bidder"]               = t.bidder_id;
        tj["cleared_quantity_kw"]  = t.cleared_quantity_kw;
        tj["clearing_price_cents"] = t.clearing_price_cents;
        tj["fallback_price"]       = t.fallback_price;
        txs.push_back(std::move(tj));
      }
      aj["transactions"] = std::move(txs);
      auctions.push_back(std::move(aj));
    }
    rj["auctions"] = std::move(auctions);
    rounds_json.push_back(std::move(rj));
  }
  j["rounds"]   = std::move(rounds_json);
  j["events"]   = events;
  j["messages"] = messages.size();
  return j;
}

std::string auction_svg(AuctionRecord const &record)
{
  constexpr double width  = 640.0;
  constexpr double height = 360.0;
  constexpr double margin = 48.0;

  auto supply = record.offers.empty() ? auction::SupplyCurve{}
                                      : auction::aggregate_bids(record.offers);
  double max_q = 0.0;
  double max_p = 0.0;
  for (auto const &s : supply.segments)
  {
    max_q += s.quantity_kw;
    max_p = std::max(max_p, s.price_cents);
  }
  if (record.curve)
  {
    max_q = std::max(max_q, record.curve->max_quantity());
    max_p = std::max(max_p, record.curve->max_price());
  }
  max_q = max_q > 0.0 ? max_q * 1.1 : 1.0;
  max_p = max_p > 0.0 ? max_p * 1.1 : 1.0;
  auto x = [&](double q) { return margin + (width - 2 * margin) * q / max_q; };
  auto y = [&](double p) { return height - margin - (height - 2 * margin) * p / max_p; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << margin << "\" y=\"20\">auction " << record.asker_id
      << ", round " << record.result.timestep << "</text>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << y(0) << "\" x2=\"" << width - margin
      << "\" y2=\"" << y(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << y(0) << "\" x2=\"" << margin << "\" y2=\""
      << margin << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width - margin << "\" y=\"" << height - 16
      << "\" text-anchor=\"end\">kW</text>\n";
  svg << "<text x=\"8\" y=\"" << margin - 8 << "\">cents/kW</text>\n";

  double start = 0.0;
  for (auto const &s : supply.segments)
  {
    double dispatched = 0.0;
    for (auto const &t : record.result.transactions)
    {
      if (t.bidder_id == s.bidder_id)
      {
        dispatched = t.cleared_quantity_kw;
      }
    }
    svg << "<rect x=\"" << x(start) << "\" y=\"" << y(s.price_cents) << "\" width=\""
        << x(start + s.quantity_kw) - x(start) << "\" height=\"" << y(0) - y(s.price_cents)
        << "\" fill=\"" << (dispatched > 0.0 ? "#4a90d9" : "#c8c8c8")
        << "\" stroke=\"white\"/>\n";
    svg << "<text x=\"" << x(start) + 2 << "\" y=\"" << y(s.price_cents) - 4 << "\">"
        << s.bidder_id << " " << format_number(s.quantity_kw) << "@"
        << format_number(s.price_cents) << "</text>\n";
    start += s.quantity_kw;
  }

  if (record.curve)
  {
    svg << "<polyline fill=\"none\" stroke=\"#d0021b\" stroke-width=\"2\" points=\"";
    double q = 0.0;
    for (auto const &p : record.curve->points())
    {
      svg << x(q) << ',' << y(p.price_cents) << ' ' << x(p.quantity_kw) << ','
          << y(p.price_cents) << ' ';
      q = p.quantity_kw;
    }
    svg << "\"/>\n";
  }
  double const eq = record.result.equilibrium_quantity_kw;
  svg << "<line x1=\"" << x(eq) << "\" y1=\"" << y(0) << "\" x2=\"" << x(eq) << "\" y2=\""
      << margin << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace temarket::market
