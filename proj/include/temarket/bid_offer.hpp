#pragma once
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


#include <string>

namespace temarket {

/// A sealed bilateral offer: `quantity_kw` of supply from one bidder to one
/// asker at `price_cents` per kW.
struct BidOffer
{
  std::string bidder_id;
  std::string asker_id;
  double      quantity_kw = 0.0;
  double      price_cents = 0.0;

  bool operator==(BidOffer const &) const = default;
};

}  // namespace temarket
