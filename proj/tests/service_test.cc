#include "paxconnect/service.h"

#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "test_support.h"

namespace paxconnect::service {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    pipeline::RunConfig config;
    config.stage = DsmStage::kTactical;
    config.synth.n_rows = 20000;
    config.gmm.num_components = 8;
    config.gmm.max_iter = 30;
    config.boost.n_rounds = 40;
    config.boost.max_depth = 5;
    config.shap_rows = 20;
    const auto run = pipeline::RunStage(config);
    tmp_ = new testing::TempDir();
    pipeline::WriteBundle(run, tmp_->path() / "tactical");
    base_ = new json(json::object());
    // First test row as a raw feature map.
    for (const auto& column : run.test_raw.columns) {
      if (column.spec.kind == FeatureKind::kCategorical) {
        (*base_)[column.spec.name] = column.tokens[0];
      } else {
        (*base_)[column.spec.name] = column.numbers[0];
      }
    }
  }
  static void TearDownTestSuite() {
    delete base_;
    delete tmp_;
  }

  void SetUp() override { service_.Load(tmp_->path() / "tactical"); }

  json Body(const HttpResponse& r) const { return json::parse(r.body); }

  json PredictRequest() const { return {{"stage", "tactical"}, {"features", *base_}}; }

  static testing::TempDir* tmp_;
  static json* base_;
  Service service_;
};

testing::TempDir* ServiceTest::tmp_ = nullptr;
json* ServiceTest::base_ = nullptr;

TEST_F(ServiceTest, PredictReturnsProbabilityAndShap) {
  const HttpResponse r = service_.Predict(PredictRequest().dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const json body = Body(r);
  const double p = body.at("probability").get<double>();
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(body.at("stage"), "tactical");
  ASSERT_EQ(body.at("shap").size(), 11u);
  EXPECT_EQ(body.at("shap").back().at("feature"), "Perceived Conn. Time");
  EXPECT_EQ(body.at("predicted_label").get<int>(),
            p >= body.at("threshold").get<double>() ? 1 : 0);
}

TEST_F(ServiceTest, ShapValuesAddUpToTheMargin) {
  const json body = Body(service_.Predict(PredictRequest().dump()));
  double total = body.at("base_value").get<double>();
  for (const auto& item : body.at("shap")) total += item.at("value").get<double>();
  const double margin = body.at("margin").get<double>();
  EXPECT_NEAR(total, margin, 1e-6);
  EXPECT_NEAR(body.at("probability").get<double>(), 1.0 / (1.0 + std::exp(-margin)), 1e-12);
}

TEST_F(ServiceTest, ShorterPerceivedTimeRaisesTheRisk) {
  json request = PredictRequest();
  request["features"]["Perceived Conn. Time"] = 30;
  const double short_p = Body(service_.Predict(request.dump())).at("probability");
  request["features"]["Perceived Conn. Time"] = 180;
  const double long_p = Body(service_.Predict(request.dump())).at("probability");
  EXPECT_GT(short_p, long_p);
}

TEST_F(ServiceTest, WhatIfReturnsOneResultPerPerturbation) {
  const json request = {{"stage", "tactical"},
                        {"base", *base_},
                        {"perturbations",
                         {{{"Perceived Conn. Time", 25}},
                          {{"Perceived Conn. Time", 240}, {"Age", 70}},
                          json::object()}}};
  const HttpResponse r = service_.WhatIf(request.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const json results = Body(r).at("results");
  ASSERT_EQ(results.size(), 3u);
  EXPECT_GT(results[0].at("probability").get<double>(),
            results[1].at("probability").get<double>());
  const json plain = Body(service_.Predict(PredictRequest().dump()));
  EXPECT_EQ(results[2].at("probability"), plain.at("probability"));
}

TEST_F(ServiceTest, WhatIfWithoutPerturbationsIsEmpty) {
  const json request = {{"stage", "tactical"}, {"base", *base_}, {"perturbations", json::array()}};
  const HttpResponse r = service_.WhatIf(request.dump());
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(Body(r).at("results").empty());
}

TEST_F(ServiceTest, MissingFeatureIsNamed) {
  json request = PredictRequest();
  request["features"].erase("Age");
  const HttpResponse r = service_.Predict(request.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(Body(r).at("field"), "Age");
}

TEST_F(ServiceTest, BadValuesAreNamed) {
  json request = PredictRequest();
  request["features"]["Dep. Day"] = 9;
  EXPECT_EQ(Body(service_.Predict(request.dump())).at("field"), "Dep. Day");
  request = PredictRequest();
  request["features"]["Sex"] = 3;
  EXPECT_EQ(Body(service_.Predict(request.dump())).at("field"), "Sex");
  request = PredictRequest();
  request["features"]["Actual Conn. Time"] = 50;
  const HttpResponse r = service_.Predict(request.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(Body(r).at("field"), "Actual Conn. Time");
  request = PredictRequest();
  request["threshold"] = 2;
  EXPECT_EQ(Body(service_.Predict(request.dump())).at("field"), "threshold");
}

TEST_F(ServiceTest, MalformedBodyIs400) {
  EXPECT_EQ(service_.Predict("{").status, 400);
  EXPECT_EQ(service_.Predict("[1]").status, 400);
  EXPECT_EQ(service_.WhatIf(R"({"stage":"tactical"})").status, 400);
}

TEST_F(ServiceTest, StageMismatchIs409) {
  json request = PredictRequest();
  request["stage"] = "strategic";
  const HttpResponse r = service_.Predict(request.dump());
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(Body(r).at("field"), "stage");
  request["stage"] = "someday";
  EXPECT_EQ(service_.Predict(request.dump()).status, 400);
}

TEST_F(ServiceTest, ModelInfoDescribesTheSchema) {
  const HttpResponse r = service_.ModelInfo();
  ASSERT_EQ(r.status, 200);
  const json info = Body(r);
  EXPECT_EQ(info.at("stage"), "tactical");
  EXPECT_EQ(info.at("features").size(), 11u);
  EXPECT_EQ(info.at("time_feature"), "Perceived Conn. Time");
  EXPECT_TRUE(info.at("cost_applicable").get<bool>());
  const double precision = info.at("test_metrics").at("precision");
  EXPECT_NEAR(info.at("r_min").get<double>(), 1.0 / precision, 1e-12);
  for (const auto& f : info.at("features")) {
    if (f.at("name") == "Traffic Network") {
      EXPECT_EQ(f.at("kind"), "categorical");
      EXPECT_FALSE(f.at("levels").empty());
    }
  }
}

TEST(ServiceWithoutModelTest, Returns503AndHealthSaysSo) {
  Service service;
  EXPECT_EQ(service.Predict("{}").status, 503);
  EXPECT_EQ(service.WhatIf("{}").status, 503);
  EXPECT_EQ(service.ModelInfo().status, 503);
  const HttpResponse health = service.Health();
  EXPECT_EQ(health.status, 200);
  EXPECT_FALSE(json::parse(health.body).at("model_loaded").get<bool>());
  EXPECT_EQ(service.Reload("").status, 400);
}

TEST_F(ServiceTest, FailedReloadKeepsTheCurrentModel) {
  const auto before = service_.snapshot();
  const HttpResponse r = service_.Reload(R"({"model_dir":"/nonexistent"})");
  EXPECT_EQ(r.status, 500);
  EXPECT_EQ(service_.snapshot(), before);
  EXPECT_EQ(service_.Reload("").status, 200);
}

TEST_F(ServiceTest, ServesOverHttp) {
  HttpServer server(service_);
  const int port = server.Bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread listener([&] { server.Listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);

  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_TRUE(json::parse(health->body).at("model_loaded").get<bool>());

  auto predict = client.Post("/v1/predict", PredictRequest().dump(), "application/json");
  ASSERT_TRUE(predict);
  EXPECT_EQ(predict->status, 200);
  EXPECT_EQ(predict->get_header_value("Access-Control-Allow-Origin"), "*");

  auto model = client.Get("/v1/model");
  ASSERT_TRUE(model);
  EXPECT_EQ(json::parse(model->body).at("stage"), "tactical");

  auto bad = client.Post("/v1/whatif", "{}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  server.Stop();
  listener.join();
}

}  // namespace
}  // namespace paxconnect::service
