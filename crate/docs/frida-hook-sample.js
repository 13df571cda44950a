// Sample Frida hook that emits androscan's NDJSON trace schema
// (docs/trace-format.md). Not executed by this repository; run it with
// something like:
//
//   frida -U -f com.example.app -l frida-hook-sample.js \
//     | grep '^{"ts"' > app.ndjson
//   androscan extract app.apk --traces app.ndjson
//
// Each hooked call prints one JSON object per line on stdout.

'use strict';

function nowIso() {
  return new Date().toISOString().replace(/\.\d{3}Z$/, 'Z');
}

function emit(record) {
  // One record per line, nothing else on the line.
  console.log(JSON.stringify(record));
}

Java.perform(function () {
  // Plain HttpURLConnection: hook connect() and capture method + URL +
  // request headers set so far.
  var HUC = Java.use('java.net.HttpURLConnection');
  HUC.connect.implementation = function () {
    var headers = {};
    var props = this.getRequestProperties();
    var keys = props.keySet().iterator();
    while (keys.hasNext()) {
      var k = keys.next();
      if (k !== null) {
        headers[k.toString()] = props.get(k).get(0).toString();
      }
    }
    emit({
      ts: nowIso(),
      api: 'HttpURLConnection.connect',
      url: this.getURL().toString(),
      method: this.getRequestMethod().toString(),
      headers: headers,
    });
    return this.connect();
  };

  // OkHttp 3: hook RealCall.execute and capture the outgoing request,
  // including a best-effort body copy for form posts.
  try {
    var RealCall = Java.use('okhttp3.RealCall');
    var Buffer = Java.use('okio.Buffer');
    RealCall.execute.implementation = function () {
      var req = this.request();
      var headers = {};
      var names = req.headers().names().iterator();
      while (names.hasNext()) {
        var name = names.next().toString();
        headers[name] = req.header(name).toString();
      }
      var record = {
        ts: nowIso(),
        api: 'okhttp3.RealCall.execute',
        url: req.url().toString(),
        method: req.method().toString(),
        headers: headers,
      };
      var body = req.body();
      if (body !== null) {
        var sink = Buffer.$new();
        body.writeTo(sink);
        record.body = sink.readUtf8();
      }
      emit(record);
      return this.execute();
    };
  } catch (e) {
    // App does not bundle OkHttp; the HttpURLConnection hook still applies.
  }
});
