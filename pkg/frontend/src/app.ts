// Application context shared by every view.

import { ApiClient } from "./gen/api-client.js";
import { HttpClient } from "./http.js";
import { PendingTracker } from "./pending.js";
import { Session, SessionStore } from "./session.js";

export interface App {
  client: ApiClient;
  session: Session;
  tracker: PendingTracker;
  navigate: (hash: string) => void;
}

export function createApp(
  gatewayUrl: string,
  store: SessionStore,
  navigate: (hash: string) => void,
): App {
  const session = new Session(store);
  const http = new HttpClient(gatewayUrl, () => session.token());
  const client = new ApiClient(http);
  const tracker = new PendingTracker(client);
  return { client, session, tracker, navigate };
}
