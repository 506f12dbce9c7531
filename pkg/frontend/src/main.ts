import { App } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(root);
  const params = new URLSearchParams(window.location.search);
  const jobId = params.get("job");
  if (jobId) {
    void app.load(jobId);
  } else {
    const picker = document.createElement("form");
    picker.className = "job-picker";
    picker.innerHTML = `
      <label>Video URL or server path
        <input name="source" placeholder="https://… or /data/video.avi" required>
      </label>
      <button type="submit">Generate notes</button>`;
    picker.addEventListener("submit", async (event) => {
      event.preventDefault();
      const source = new FormData(picker).get("source") as string;
      const submitted = await app.api.submit(source);
      window.location.search = `?job=${submitted}`;
    });
    root.prepend(picker);
  }
}
