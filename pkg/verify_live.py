import requests
import json
import os
import time

API_URL = os.getenv("API_URL", "https://polygamy-api.onrender.com")

# W state (|100> + |010> + |001>)/sqrt(3), as a state file
W3_STATE = {
    "kind": "pure",
    "n_qubits": 3,
    "amplitudes": [[0, 0], [3 ** -0.5, 0], [3 ** -0.5, 0], [0, 0],
                   [3 ** -0.5, 0], [0, 0], [0, 0], [0, 0]],
}


def check(name, response, expect=None):
    print(f"[{name}] Status Code: {response.status_code}")
    if response.status_code != 200:
        print("HTTP Error:", response.text)
        return False
    data = response.json()
    if expect is not None:
        key, value, tol = expect
        got = data.get(key)
        ok = got is not None and abs(got - value) <= tol
        print(f"[{name}] {key} = {got} (expected {value} +/- {tol}) -> {'OK' if ok else 'MISMATCH'}")
        return ok
    print(json.dumps(data, indent=2)[:400])
    return True


def test_live_api():
    print("Testing LIVE API at:", API_URL)
    start_time = time.time()
    results = []
    try:
        results.append(check("health", requests.get(f"{API_URL}/health", timeout=60)))
        results.append(check("measure", requests.post(
            f"{API_URL}/api/measure", json={"state": W3_STATE, "kind": "concurrence"}, timeout=60),
            expect=("global", 2 * 2 ** 0.5 / 3, 1e-9)))
        results.append(check("threshold", requests.post(
            f"{API_URL}/api/threshold", json={"state": W3_STATE, "kind": "eof", "which": "alpha1"}, timeout=60),
            expect=("threshold", 1.35244, 1e-4)))
        example = requests.get(f"{API_URL}/api/example/2", timeout=60)
        results.append(check("example", example) and example.json().get("passed", False))
    except Exception as e:
        print(f"Connection Failed: {e}")
        return False

    duration = time.time() - start_time
    print(f"Response time: {duration:.2f}s")
    print("SUCCESS! All live checks passed." if all(results) else "Some live checks FAILED.")
    return all(results)


if __name__ == "__main__":
    raise SystemExit(0 if test_live_api() else 1)
