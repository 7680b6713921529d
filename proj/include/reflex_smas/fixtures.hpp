#pragma once

// Built-in benchmark scenarios. Generated by tools/embed_fixtures.py from
// data/fixtures/; edit the JSON files and rerun the script.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reflex_smas/schema.hpp"

namespace reflex_smas {

namespace detail {
inline constexpr std::string_view kPersonFixture = R"json({
  "name": "Person",
  "band": "medium",
  "source": [
    {
      "id": "p1",
      "name": "firstName"
    },
    {
      "id": "p2",
      "name": "lastName"
    },
    {
      "id": "p3",
      "name": "birthDate"
    },
    {
      "id": "p4",
      "name": "emailAddress"
    },
    {
      "id": "p5",
      "name": "phoneNumber"
    },
    {
      "id": "p6",
      "name": "homeAddress"
    }
  ],
  "target": [
    {
      "id": "c1",
      "name": "fName"
    },
    {
      "id": "c2",
      "name": "lName"
    },
    {
      "id": "c3",
      "name": "dateOfBirth"
    },
    {
      "id": "c4",
      "name": "emailAddr"
    },
    {
      "id": "c5",
      "name": "phoneNo"
    },
    {
      "id": "c6",
      "name": "address"
    }
  ],
  "expected": [
    [
      "p1",
      "c1"
    ],
    [
      "p2",
      "c2"
    ],
    [
      "p3",
      "c3"
    ],
    [
      "p4",
      "c4"
    ],
    [
      "p5",
      "c5"
    ],
    [
      "p6",
      "c6"
    ]
  ]
}
)json";
inline constexpr std::string_view kOrderFixture = R"json({
  "name": "Order",
  "band": "high",
  "source": [
    {
      "id": "o1",
      "name": "orderNumber"
    },
    {
      "id": "o2",
      "name": "orderDate"
    },
    {
      "id": "o3",
      "name": "customerName"
    },
    {
      "id": "o4",
      "name": "shippingAddress"
    },
    {
      "id": "o5",
      "name": "totalAmount"
    },
    {
      "id": "o6",
      "name": "qtyOrdered"
    },
    {
      "id": "o7",
      "name": "unitPrice"
    },
    {
      "id": "o8",
      "name": "deliveryDate"
    }
  ],
  "target": [
    {
      "id": "b1",
      "name": "ordNum"
    },
    {
      "id": "b2",
      "name": "dtOrdered"
    },
    {
      "id": "b3",
      "name": "buyerNm"
    },
    {
      "id": "b4",
      "name": "shipToAddr"
    },
    {
      "id": "b5",
      "name": "totalPrice"
    },
    {
      "id": "b6",
      "name": "orderedQty"
    },
    {
      "id": "b7",
      "name": "eachPrice"
    },
    {
      "id": "b8",
      "name": "dlvryDt"
    }
  ],
  "expected": [
    [
      "o1",
      "b1"
    ],
    [
      "o2",
      "b2"
    ],
    [
      "o3",
      "b3"
    ],
    [
      "o4",
      "b4"
    ],
    [
      "o5",
      "b5"
    ],
    [
      "o6",
      "b6"
    ],
    [
      "o7",
      "b7"
    ],
    [
      "o8",
      "b8"
    ]
  ]
}
)json";
inline constexpr std::string_view kTravelFixture = R"json({
  "name": "Travel",
  "band": "low",
  "source": [
    {"id": "t01", "name": "travelerName"},
    {"id": "t02", "name": "passportNumber"},
    {"id": "t03", "name": "departureCity"},
    {"id": "t04", "name": "arrivalCity"},
    {"id": "t05", "name": "departureDate"},
    {"id": "t06", "name": "returnDate"},
    {"id": "t07", "name": "flightNumber"},
    {"id": "t08", "name": "airlineName"},
    {"id": "t09", "name": "seatClass"},
    {"id": "t10", "name": "hotelName"},
    {"id": "t11", "name": "checkInDate"},
    {"id": "t12", "name": "checkOutDate"},
    {"id": "t13", "name": "roomType"},
    {"id": "t14", "name": "carRental"},
    {"id": "t15", "name": "totalCost"}
  ],
  "target": [
    {"id": "r01", "name": "travellerName"},
    {"id": "r02", "name": "passportNo"},
    {"id": "r03", "name": "departCity"},
    {"id": "r04", "name": "arrivCity"},
    {"id": "r05", "name": "departDate"},
    {"id": "r06", "name": "return_date"},
    {"id": "r07", "name": "flightNo"},
    {"id": "r08", "name": "airline"},
    {"id": "r09", "name": "seat_class"},
    {"id": "r10", "name": "hotel_name"},
    {"id": "r11", "name": "checkinDate"},
    {"id": "r12", "name": "checkoutDate"},
    {"id": "r13", "name": "room_type"},
    {"id": "r14", "name": "car_rental"},
    {"id": "r15", "name": "totalPrice"}
  ],
  "expected": [["t01","r01"],["t02","r02"],["t03","r03"],["t04","r04"],["t05","r05"],["t06","r06"],["t07","r07"],["t08","r08"],["t09","r09"],["t10","r10"],["t11","r11"],["t12","r12"],["t13","r13"],["t14","r14"],["t15","r15"]]
}
)json";
} // namespace detail

/// Raw JSON of the built-in fixtures, keyed by lowercase name.
inline std::vector<std::pair<std::string_view, std::string_view>> builtin_fixture_sources() {
    return {{"person", detail::kPersonFixture}, {"order", detail::kOrderFixture}, {"travel", detail::kTravelFixture}};
}

inline const std::vector<Scenario>& builtin_fixtures() {
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> v;
        for (const auto& [name, text] : builtin_fixture_sources()) v.push_back(parse_scenario(text));
        return v;
    }();
    return all;
}

/// Case-insensitive lookup by scenario name.
inline std::optional<Scenario> find_fixture(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    const std::string key = lower(name);
    for (const auto& s : builtin_fixtures())
        if (lower(s.name) == key) return s;
    return std::nullopt;
}

} // namespace reflex_smas
