#include "oracles.hpp"
#include "ssr/errors.hpp"
#include "ssr/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ssr;

namespace {

PanelDataset parse(const std::string& text) {
    std::istringstream in(text);
    return parse_panel(in, "panel.csv");
}

long parse_error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST(Panel, SmallExample) {
    PanelDataset ds = parse("unit,category,time,value\nA,x,1,1.5\nB,x,1,2\nA,x,2,3\nB,x,2,4\n");
    EXPECT_EQ(ds.values.dims(), (Dims{2, 1, 2}));
    EXPECT_EQ(ds.units, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(ds.values(0, 0, 0), 1.5);
    EXPECT_EQ(ds.values(1, 0, 1), 4.0);
}

TEST(Panel, DuplicateCellNamesBothLines) {
    try {
        parse("unit,category,time,value\nA,x,1,1\nA,x,1,2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Panel, RowOrderDoesNotMatter) {
    PanelDataset a = parse("unit,category,time,value\nA,x,1,1\nB,x,1,2\nA,x,2,3\nB,x,2,4\n");
    PanelDataset b = parse("unit,category,time,value\nB,x,2,4\nA,x,2,3\nB,x,1,2\nA,x,1,1\n");
    EXPECT_EQ(a, b);
}

TEST(Panel, MissingCellsAreListed) {
    try {
        parse("unit,category,time,value\nA,x,1,1\nB,x,1,2\nA,x,2,3\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("(B, x, 2)"), std::string::npos);
    }
}

TEST(Panel, MalformedRowsReportLine) {
    EXPECT_EQ(parse_error_line("unit,category,time,value\nA,x,1,1\nA,x,2\n"), 3);
    EXPECT_EQ(parse_error_line("unit,category,time,value\nA,x,1,1\nA,x,2,abc\n"), 3);
    EXPECT_EQ(parse_error_line("unit,cat,time,value\nA,x,1,1\n"), 1);
}

TEST(Panel, NumericTimesSortNumerically) {
    PanelDataset ds = parse("unit,category,time,value\nA,x,10,3\nA,x,2,2\nA,x,1,1\n");
    EXPECT_EQ(ds.times, (std::vector<std::string>{"1", "2", "10"}));
    EXPECT_EQ(ds.values(0, 0, 2), 3.0);
}

TEST(Panel, HandlesBomAndCrlf) {
    PanelDataset ds = parse("\xEF\xBB\xBFunit,category,time,value\r\nA,x,1,1\r\nA,x,2,2\r\n");
    EXPECT_EQ(ds.values.dims(), (Dims{1, 1, 2}));
}

TEST(Panel, WriteReadRoundTrip) {
    std::mt19937_64 g(81);
    PanelDataset ds{{"u1", "u2", "u3"}, {"a", "b"}, {"1", "2", "3", "4"}, oracle::random_tensor(g, {3, 2, 4})};
    std::ostringstream out;
    write_panel(ds, out);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_panel(in), ds);
}

TEST(Distance, ParsesSquareMatrix) {
    std::istringstream in("0,1\n1,0\n");
    Mat d = parse_distance(in);
    EXPECT_EQ(d(0, 1), 1.0);
    std::istringstream bad("0,1,2\n1,0,1\n");
    EXPECT_THROW(parse_distance(bad), ParseError);
}

TEST(Config, AppliesKeys) {
    RunConfig c;
    std::istringstream in("# comment\nbandwidth = 2.5\nmax_iter = 100  # trailing\ndrift = auto\nallowance=0.5\n");
    apply_config(c, in, "run.cfg");
    EXPECT_EQ(c.bandwidth, 2.5);
    EXPECT_EQ(c.fista.max_iter, 100);
    EXPECT_TRUE(std::isnan(c.detector.drift));
    EXPECT_EQ(c.detector.allowance, 0.5);
}

TEST(Config, ErrorsNameFileAndLine) {
    RunConfig c;
    std::istringstream in("bandwidth = 2\n\nbogus = 1\n");
    try {
        apply_config(c, in, "run.cfg");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.file(), "run.cfg");
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    }
    std::istringstream in2("max_iter = 1.5\n");
    EXPECT_THROW(apply_config(c, in2, "x"), ParseError);
}

TEST(GridSpec, Forms) {
    LambdaGrid a = parse_grid_spec("0:0.2:3,1|2");
    ASSERT_EQ(a.size(), 6u);
    EXPECT_EQ(a.pairs[0], std::make_pair(0.0, 1.0));
    EXPECT_NEAR(a.pairs[1].first, 0.1, 1e-15);
    EXPECT_EQ(a.pairs[3].second, 2.0);
    LambdaGrid b = parse_grid_spec("0,log:0.01:1:3");
    ASSERT_EQ(b.size(), 3u);
    EXPECT_NEAR(b.pairs[1].second, 0.1, 1e-12);
    EXPECT_EQ(parse_grid_spec(format_grid_spec(a)).pairs, a.pairs);
    EXPECT_THROW(parse_grid_spec("1|2"), ParseError);
    EXPECT_THROW(parse_grid_spec("0:1:0,1"), ParseError);
    EXPECT_THROW(parse_grid_spec("log:0:1:3,1"), ParseError);
}

TEST(FitCsv, ExactRoundTrip) {
    std::mt19937_64 g(82);
    Dims d{2, 2, 3};
    PanelDataset ds{{"a", "b"}, {"x", "y"}, {"1", "2", "3"}, oracle::random_tensor(g, d)};
    LambdaGrid grid = LambdaGrid::product({0.0, 0.1}, {0.3});
    std::vector<SsrFit> fits(2);
    for (std::size_t k = 0; k < 2; ++k) {
        fits[k].lambda1 = grid.pairs[k].first;
        fits[k].lambda2 = grid.pairs[k].second;
        for (Vec* v : {&fits[k].theta_m, &fits[k].theta_h, &fits[k].mu_hat, &fits[k].h_hat, &fits[k].residual})
            *v = oracle::random_vector(g, d.size()) / 3.0;
    }
    std::ostringstream out;
    write_fit_csv(fits, ds, out);
    std::istringstream in(out.str());
    std::vector<SsrFit> back = read_fit_csv(in, ds, grid);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(back[k].theta_h, fits[k].theta_h);
        EXPECT_EQ(back[k].mu_hat, fits[k].mu_hat);
        EXPECT_EQ(back[k].residual, fits[k].residual);
    }
}

TEST(Numbers, ShortestRoundTrip) {
    std::mt19937_64 g(83);
    std::normal_distribution<double> n(0.0, 1e3);
    for (int k = 0; k < 1000; ++k) {
        double v = n(g);
        EXPECT_EQ(parse_double(format_double(v), "v"), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_THROW(parse_double("1.0x", "v"), ParseError);
    EXPECT_THROW(parse_double("", "v"), ParseError);
}
