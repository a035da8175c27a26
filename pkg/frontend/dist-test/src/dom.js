/** Small DOM construction helpers; no framework. */
export function el(tag, attrs = {}, children = []) {
    const node = document.createElement(tag);
    for (const [k, v] of Object.entries(attrs)) {
        if (k === "class")
            node.className = v;
        else
            node.setAttribute(k, v);
    }
    for (const child of children) {
        node.append(child);
    }
    return node;
}
export function clear(node) {
    while (node.firstChild)
        node.removeChild(node.firstChild);
}
export function formatNumber(v) {
    if (Number.isInteger(v))
        return String(v);
    return v.toPrecision(4);
}
/** Simple SVG bar chart. */
export function barChart(series, width = 260, height = 80) {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    const max = Math.max(...series.map((s) => s.value), 1e-12);
    const barW = width / Math.max(series.length, 1);
    series.forEach((s, i) => {
        const h = (s.value / max) * (height - 4);
        const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
        rect.setAttribute("x", String(i * barW + 1));
        rect.setAttribute("y", String(height - h));
        rect.setAttribute("width", String(Math.max(barW - 2, 1)));
        rect.setAttribute("height", String(h));
        rect.setAttribute("fill", "#4285f4");
        const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
        title.textContent = `${s.label}: ${formatNumber(s.value)}`;
        rect.append(title);
        svg.append(rect);
    });
    return svg;
}
/** Polyline chart for PDP curves and CDF lines. */
export function lineChart(seriesList, width = 300, height = 100, markers = []) {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", String(width));
    svg.setAttribute("height", String(height));
    const all = seriesList.flatMap((s) => s.ys).concat(markers);
    const lo = Math.min(...all, 0);
    const hi = Math.max(...all, 1);
    const scaleY = (v) => height - 4 - ((v - lo) / (hi - lo || 1)) * (height - 8);
    const colors = ["#4285f4", "#f4a742", "#42b05c", "#b04242"];
    for (const t of markers) {
        const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
        line.setAttribute("x1", "0");
        line.setAttribute("x2", String(width));
        line.setAttribute("y1", String(scaleY(t)));
        line.setAttribute("y2", String(scaleY(t)));
        line.setAttribute("stroke", "#999");
        line.setAttribute("stroke-dasharray", "4 3");
        svg.append(line);
    }
    seriesList.forEach((s, si) => {
        const step = width / Math.max(s.ys.length - 1, 1);
        const points = s.ys.map((y, i) => `${i * step},${scaleY(y)}`).join(" ");
        const poly = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
        poly.setAttribute("points", points);
        poly.setAttribute("fill", "none");
        poly.setAttribute("stroke", colors[si % colors.length]);
        poly.setAttribute("stroke-width", "2");
        const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
        title.textContent = s.name;
        poly.append(title);
        svg.append(poly);
    });
    return svg;
}
